"""Discrete-log identification protocol: commit, challenge, respond, verify.

Interactive flow (per round i): prover sends d_i = g^{r_i}, verifier sends
challenge c_i, prover answers s_i = r_i + c_i*x mod q, verifier checks
g^{s_i} == d_i * y^{c_i} (mod p). The non-interactive variant derives the
challenges by hashing the transcript instead of asking a verifier.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass
from random import Random
from typing import Optional, Sequence

from . import canon
from .errors import ChallengeMismatch
from .groups import GroupParams

DEFAULT_ROUNDS = 2
DEFAULT_CHALLENGE_BITS = 128


@dataclass
class NIProof:
    commitments: list[int]
    answers: list[int]


class Prover:
    """Client-side state: the secret key and per-round commitment randomness.

    Neither ever leaves this object; messages carry only d and s values.
    """

    def __init__(self, group: GroupParams, secret_key: Optional[int] = None,
                 rng: Optional[Random] = None):
        self.group = group
        self._rng = rng
        if secret_key is None:
            secret_key = self._rand_secret()
        if not (1 <= secret_key <= group.q - 1):
            raise ValueError("secret key out of range")
        self._x = secret_key
        self._r: Optional[list[int]] = None
        self.public_key = pow(group.g, secret_key, group.p)

    def _rand_scalar(self) -> int:
        if self._rng is not None:
            return self._rng.randrange(self.group.q)
        return secrets.randbelow(self.group.q)

    def _rand_secret(self) -> int:
        if self._rng is not None:
            return self._rng.randrange(1, self.group.q)
        return secrets.randbelow(self.group.q - 1) + 1

    def commit(self, rounds: int = DEFAULT_ROUNDS) -> list[int]:
        """Draw fresh randomness for each round and return the commitments."""
        g, p = self.group.g, self.group.p
        self._r = [self._rand_scalar() for _ in range(rounds)]
        return [pow(g, r, p) for r in self._r]

    def respond(self, challenges: Sequence[int]) -> list[int]:
        """Answer the issued challenges; consumes the commitment randomness.

        One commitment list answers exactly one challenge list — reuse would
        let a verifier holding two answer sets extract the secret key.
        """
        if self._r is None:
            raise ChallengeMismatch("no outstanding commitment")
        if len(challenges) != len(self._r):
            raise ChallengeMismatch("challenge count does not match commitments")
        q = self.group.q
        answers = [(r + c * self._x) % q for r, c in zip(self._r, challenges)]
        self._r = None
        return answers

    def prove_noninteractive(self, context_tag: bytes,
                             rounds: int = DEFAULT_ROUNDS,
                             challenge_bits: int = DEFAULT_CHALLENGE_BITS) -> NIProof:
        commitments = self.commit(rounds)
        challenges = derive_challenges(self.group, self.public_key, commitments,
                                       context_tag, challenge_bits)
        return NIProof(commitments=commitments, answers=self.respond(challenges))


def random_challenge(challenge_bits: int = DEFAULT_CHALLENGE_BITS,
                     rng: Optional[Random] = None) -> int:
    if rng is not None:
        return rng.getrandbits(challenge_bits)
    return secrets.randbits(challenge_bits)


def verify_round(group: GroupParams, y: int, d: int, c: int, s: int) -> bool:
    left = pow(group.g, s, group.p)
    right = (d * pow(y, c, group.p)) % group.p
    return left == right


def verify_transcript(group: GroupParams, y: int, commitments: Sequence[int],
                      challenges: Sequence[int], answers: Sequence[int]) -> bool:
    if not commitments or not (len(commitments) == len(challenges) == len(answers)):
        return False
    return all(verify_round(group, y, d, c, s)
               for d, c, s in zip(commitments, challenges, answers))


def derive_challenges(group: GroupParams, y: int, commitments: Sequence[int],
                      context_tag: bytes,
                      challenge_bits: int = DEFAULT_CHALLENGE_BITS) -> list[int]:
    """Fiat-Shamir: c_i = digest(g, y, all commitments, context tag, i) mod 2^bits."""
    mask = (1 << challenge_bits) - 1
    challenges = []
    for i in range(len(commitments)):
        seed = canon.encode([group.g, y, list(commitments), context_tag, i])
        challenges.append(int.from_bytes(canon.digest(seed), "big") & mask)
    return challenges


def verify_noninteractive(group: GroupParams, y: int, context_tag: bytes,
                          proof: NIProof,
                          challenge_bits: int = DEFAULT_CHALLENGE_BITS) -> bool:
    ds, ss = proof.commitments, proof.answers
    if not ds or len(ds) != len(ss):
        return False
    if not all(isinstance(v, int) and 0 < v < group.p for v in ds):
        return False
    if not all(isinstance(v, int) and 0 <= v < group.q for v in ss):
        return False
    challenges = derive_challenges(group, y, ds, context_tag, challenge_bits)
    return verify_transcript(group, y, ds, challenges, ss)


def simulate_round(group: GroupParams, y: int,
                   challenge_bits: int = DEFAULT_CHALLENGE_BITS,
                   rng: Optional[Random] = None) -> tuple[int, int, int]:
    """Honest-verifier zero-knowledge simulator: a valid-looking (d, c, s)
    triple produced without the secret key, by picking c and s first and
    solving d = g^s * y^{-c}."""
    if rng is not None:
        s = rng.randrange(group.q)
        c = rng.getrandbits(challenge_bits)
    else:
        s = secrets.randbelow(group.q)
        c = secrets.randbits(challenge_bits)
    y_inv_c = pow(pow(y, c, group.p), group.p - 2, group.p)
    d = (pow(group.g, s, group.p) * y_inv_c) % group.p
    return d, c, s
