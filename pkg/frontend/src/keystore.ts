/**
 * Browser keystore: the identity's secret key stays in local storage and
 * is only ever fed to the in-page prover, never serialized into requests.
 */

export interface StoredIdentity {
  secretKey: string; // decimal
  publicKey: string; // decimal
  requestId: string | null;
  unvId: string | null;
  permanentId: string | null;
}

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

const KEY = "ballotledger.identity";

export class BrowserKeystore {
  constructor(private readonly storage: StorageLike) {}

  load(): StoredIdentity | null {
    const raw = this.storage.getItem(KEY);
    return raw === null ? null : JSON.parse(raw) as StoredIdentity;
  }

  save(identity: StoredIdentity): void {
    this.storage.setItem(KEY, JSON.stringify(identity));
  }

  clear(): void {
    this.storage.removeItem(KEY);
  }
}

/** In-memory storage for tests and non-browser environments. */
export function memoryStorage(): StorageLike {
  const map = new Map<string, string>();
  return {
    getItem: (k) => map.get(k) ?? null,
    setItem: (k, v) => void map.set(k, v),
    removeItem: (k) => void map.delete(k),
  };
}
