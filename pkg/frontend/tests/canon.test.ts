/** Cross-language vectors: the TS encoder must produce byte-identical
 * output to the service's canonical serialization. */

import { describe, expect, it } from "vitest";

import { encode, sha256 } from "../src/canon.js";
import { bytesToHex, hexToBytes } from "../src/mathmod.js";
import vectors from "./fixtures/vectors.json";

function vectorValue(kind: string, v: unknown): Parameters<typeof encode>[0] {
  switch (kind) {
    case "int":
      return BigInt(v as string);
    case "str":
      return v as string;
    case "bytes":
      return hexToBytes(v as string);
    case "list-int":
      return (v as string[]).map(BigInt);
    case "mixed":
      return [23n, new Uint8Array([1, 2]), "s", [5n]];
    default:
      throw new Error(kind);
  }
}

describe("canonical encoding", () => {
  for (const vector of vectors.canon) {
    it(`matches the service for ${vector.value.kind} ${vector.value.v}`, () => {
      const value = vectorValue(vector.value.kind, vector.value.v);
      expect(bytesToHex(encode(value))).toBe(vector.hex);
    });
  }

  it("rejects unsupported values", () => {
    expect(() => encode(1 as unknown as bigint)).toThrow();
  });
});

describe("sha256", () => {
  it("matches the reference digest of 'abc'", async () => {
    const digest = await sha256(new TextEncoder().encode("abc"));
    expect(bytesToHex(digest)).toBe(
      "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  });
});
