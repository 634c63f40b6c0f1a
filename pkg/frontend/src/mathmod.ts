/**
 * BigInt modular arithmetic for the identification protocol.
 */

/** Computes base^exp mod m by square-and-multiply. */
export function modPow(base: bigint, exp: bigint, m: bigint): bigint {
  if (m === 1n) return 0n;
  let result = 1n;
  let b = ((base % m) + m) % m;
  let e = exp;
  while (e > 0n) {
    if (e & 1n) {
      result = (result * b) % m;
    }
    e >>= 1n;
    b = (b * b) % m;
  }
  return result;
}

/** Uniform random bigint in [0, bound) via rejection sampling. */
export function randomBelow(bound: bigint): bigint {
  if (bound <= 0n) throw new Error("bound must be positive");
  const bits = bound.toString(2).length;
  const bytes = Math.ceil(bits / 8);
  const mask = (1n << BigInt(bits)) - 1n;
  const buf = new Uint8Array(bytes);
  for (;;) {
    crypto.getRandomValues(buf);
    const candidate = bytesToBigInt(buf) & mask;
    if (candidate < bound) return candidate;
  }
}

/** Uniform random bigint in [1, bound): secret keys exclude zero. */
export function randomSecret(bound: bigint): bigint {
  return randomBelow(bound - 1n) + 1n;
}

export function bytesToBigInt(bytes: Uint8Array): bigint {
  let value = 0n;
  for (const b of bytes) {
    value = (value << 8n) | BigInt(b);
  }
  return value;
}

export function hexToBigInt(hex: string): bigint {
  return hex === "" ? 0n : BigInt("0x" + hex);
}

export function bigIntToHex(value: bigint): string {
  if (value < 0n) throw new Error("negative value");
  return value.toString(16);
}

export function hexToBytes(hex: string): Uint8Array {
  if (hex.length % 2 !== 0) throw new Error("odd-length hex");
  const out = new Uint8Array(hex.length / 2);
  for (let i = 0; i < out.length; i++) {
    out[i] = parseInt(hex.slice(2 * i, 2 * i + 2), 16);
  }
  return out;
}

export function bytesToHex(bytes: Uint8Array): string {
  return Array.from(bytes, (b) => b.toString(16).padStart(2, "0")).join("");
}
