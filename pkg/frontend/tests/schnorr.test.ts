import { describe, expect, it } from "vitest";

import { hexToBytes } from "../src/mathmod.js";
import { deriveChallenges, GroupParams, Prover, verifyRound } from "../src/schnorr.js";
import vectors from "./fixtures/vectors.json";

const TOY: GroupParams = { p: 23n, q: 11n, g: 2n };

describe("prover", () => {
  it("derives the toy public key", () => {
    expect(new Prover(TOY, 3n).publicKey).toBe(8n);
  });

  it("completes interactive rounds for every secret", () => {
    for (let x = 1n; x < TOY.q; x++) {
      const prover = new Prover(TOY, x);
      const ds = prover.commit(2);
      const cs = [5n, 9n];
      const ss = prover.respond(cs);
      for (let i = 0; i < 2; i++) {
        expect(verifyRound(TOY, prover.publicKey, ds[i], cs[i], ss[i])).toBe(true);
      }
    }
  });

  it("consumes randomness on respond", () => {
    const prover = new Prover(TOY, 3n);
    prover.commit(2);
    prover.respond([1n, 2n]);
    expect(() => prover.respond([1n, 2n])).toThrow();
  });

  it("rejects out-of-range secrets", () => {
    expect(() => new Prover(TOY, 0n)).toThrow();
    expect(() => new Prover(TOY, 11n)).toThrow();
  });
});

describe("fiat-shamir challenge derivation", () => {
  it("matches the service's derivation exactly", async () => {
    const fixture = vectors.deriveChallenges;
    const group: GroupParams = {
      p: BigInt(fixture.p), q: BigInt(fixture.q), g: BigInt(fixture.g),
    };
    const challenges = await deriveChallenges(
      group, BigInt(fixture.y), fixture.commitments.map(BigInt),
      hexToBytes(fixture.contextTagHex), fixture.challengeBits);
    expect(challenges.map(String)).toEqual(fixture.challenges);
  });

  it("reproduces the service-verified proof from fixed randomness", async () => {
    const fixture = vectors.niProof;
    const prover = new Prover(TOY, BigInt(fixture.secretKey));
    // pin the commitment randomness to the fixture's values
    const randomness = fixture.randomness.map(BigInt);
    (prover as unknown as { randomness: bigint[] }).randomness = [...randomness];
    const commitments = randomness.map((r) => {
      let acc = 1n;
      for (let i = 0n; i < r; i++) acc = (acc * TOY.g) % TOY.p;
      return acc;
    });
    expect(commitments.map(String)).toEqual(fixture.commitments);
    const challenges = await deriveChallenges(
      TOY, BigInt(fixture.publicKey), commitments,
      hexToBytes(fixture.contextTagHex), 128);
    const answers = prover.respond(challenges);
    expect(answers.map(String)).toEqual(fixture.answers);
  });

  it("round proofs verify and bind to the context", async () => {
    // the production group: challenge collisions mod q are impossible, so
    // a proof for one context never satisfies another context's equations
    // (in the toy group distinct 128-bit challenges collide mod 11 with
    // probability 1/11 per round, which would make this test flaky)
    const prod = vectors.productionGroup;
    const group: GroupParams = {
      p: BigInt(prod.p), q: BigInt(prod.q), g: BigInt(prod.g),
    };
    const prover = new Prover(group, 123456789n);
    const proof = await prover.proveNonInteractive(
      new TextEncoder().encode("ctx"), 2, 128);
    const challenges = await deriveChallenges(
      group, prover.publicKey, proof.commitments,
      new TextEncoder().encode("ctx"), 128);
    proof.answers.forEach((s, i) => {
      expect(verifyRound(group, prover.publicKey, proof.commitments[i],
                         challenges[i], s)).toBe(true);
    });
    const wrongContext = await deriveChallenges(
      group, prover.publicKey, proof.commitments,
      new TextEncoder().encode("other"), 128);
    const anyHolds = proof.answers.some((s, i) =>
      verifyRound(group, prover.publicKey, proof.commitments[i],
                  wrongContext[i], s));
    expect(anyHolds).toBe(false);
  });
});
