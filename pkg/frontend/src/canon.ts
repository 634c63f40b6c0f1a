/**
 * Canonical byte encoding, matching the service's serialization exactly.
 * Only the value kinds the client hashes are implemented: integers
 * (decimal ASCII), byte strings, text and lists. Tag byte + big-endian
 * u32 length prefix per value.
 */

export type CanonValue = bigint | Uint8Array | string | CanonValue[];

const TAG_INT = 0x49; // 'I'
const TAG_BYTES = 0x59; // 'Y'
const TAG_STR = 0x53; // 'S'
const TAG_LIST = 0x4c; // 'L'

function u32(n: number): Uint8Array {
  const out = new Uint8Array(4);
  new DataView(out.buffer).setUint32(0, n, false);
  return out;
}

function concat(parts: Uint8Array[]): Uint8Array {
  const total = parts.reduce((n, p) => n + p.length, 0);
  const out = new Uint8Array(total);
  let offset = 0;
  for (const part of parts) {
    out.set(part, offset);
    offset += part.length;
  }
  return out;
}

export function encode(value: CanonValue): Uint8Array {
  if (typeof value === "bigint") {
    const body = new TextEncoder().encode(value.toString(10));
    return concat([Uint8Array.of(TAG_INT), u32(body.length), body]);
  }
  if (value instanceof Uint8Array) {
    return concat([Uint8Array.of(TAG_BYTES), u32(value.length), value]);
  }
  if (typeof value === "string") {
    const body = new TextEncoder().encode(value);
    return concat([Uint8Array.of(TAG_STR), u32(body.length), body]);
  }
  if (Array.isArray(value)) {
    return concat([Uint8Array.of(TAG_LIST), u32(value.length),
                   ...value.map(encode)]);
  }
  throw new Error("unsupported canonical value");
}

export async function sha256(data: Uint8Array): Promise<Uint8Array> {
  const digest = await crypto.subtle.digest(
    "SHA-256",
    data.buffer.slice(data.byteOffset, data.byteOffset + data.byteLength) as ArrayBuffer,
  );
  return new Uint8Array(digest);
}
