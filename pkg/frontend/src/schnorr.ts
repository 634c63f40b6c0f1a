/**
 * Client-side prover for the discrete-log identification protocol.
 * The secret key and commitment randomness live only in this module's
 * objects; protocol messages carry commitments and answers alone.
 */

import { CanonValue, encode, sha256 } from "./canon.js";
import { bytesToBigInt, modPow, randomBelow } from "./mathmod.js";

export interface GroupParams {
  p: bigint;
  q: bigint;
  g: bigint;
}

export interface NIProof {
  commitments: bigint[];
  answers: bigint[];
}

export class Prover {
  readonly publicKey: bigint;
  private randomness: bigint[] | null = null;

  constructor(readonly group: GroupParams, private readonly secretKey: bigint) {
    if (secretKey < 1n || secretKey >= group.q) {
      throw new Error("secret key out of range");
    }
    this.publicKey = modPow(group.g, secretKey, group.p);
  }

  /** Fresh randomness per round; returns the commitments d_i = g^{r_i}. */
  commit(rounds: number): bigint[] {
    this.randomness = [];
    const ds: bigint[] = [];
    for (let i = 0; i < rounds; i++) {
      const r = randomBelow(this.group.q);
      this.randomness.push(r);
      ds.push(modPow(this.group.g, r, this.group.p));
    }
    return ds;
  }

  /** Answers s_i = r_i + c_i * x mod q; consumes the randomness. */
  respond(challenges: bigint[]): bigint[] {
    if (this.randomness === null || challenges.length !== this.randomness.length) {
      throw new Error("challenge count does not match outstanding commitments");
    }
    const q = this.group.q;
    const answers = challenges.map(
      (c, i) => (this.randomness![i] + c * this.secretKey) % q,
    );
    this.randomness = null;
    return answers;
  }

  async proveNonInteractive(contextTag: Uint8Array, rounds: number,
                            challengeBits: number): Promise<NIProof> {
    const commitments = this.commit(rounds);
    const challenges = await deriveChallenges(
      this.group, this.publicKey, commitments, contextTag, challengeBits);
    return { commitments, answers: this.respond(challenges) };
  }
}

/** Fiat-Shamir: c_i = digest(g, y, all commitments, context tag, i) mod 2^bits. */
export async function deriveChallenges(group: GroupParams, y: bigint,
                                       commitments: bigint[],
                                       contextTag: Uint8Array,
                                       challengeBits: number): Promise<bigint[]> {
  const mask = (1n << BigInt(challengeBits)) - 1n;
  const challenges: bigint[] = [];
  for (let i = 0; i < commitments.length; i++) {
    const seed: CanonValue = [group.g, y, commitments, contextTag, BigInt(i)];
    const digest = await sha256(encode(seed));
    challenges.push(bytesToBigInt(digest) & mask);
  }
  return challenges;
}

/** Verification equation g^s == d * y^c (mod p), for client-side checks. */
export function verifyRound(group: GroupParams, y: bigint, d: bigint,
                            c: bigint, s: bigint): boolean {
  const left = modPow(group.g, s, group.p);
  const right = (d * modPow(y, c, group.p)) % group.p;
  return left === right;
}
