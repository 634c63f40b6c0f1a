/**
 * Typed client for the voting service API.
 *
 * Wire conventions: JSON bodies, integers as decimal strings, group
 * elements and hashes as lowercase hex. Mutating poll calls carry the
 * caller's permanent id plus a fresh non-interactive proof bound to
 * (method, path, body digest) in the auth headers.
 *
 * Every outgoing request passes through an optional capture hook, which
 * the end-to-end tests use to assert the secret key never leaves the
 * client.
 */

import { sha256 } from "./canon.js";
import { bigIntToHex, bytesToHex, hexToBigInt } from "./mathmod.js";
import { GroupParams, NIProof, Prover } from "./schnorr.js";

export interface CapturedRequest {
  method: string;
  path: string;
  body: string;
  headers: Record<string, string>;
}

export interface ServiceParams {
  group: GroupParams;
  groupName: string;
  rounds: number;
  challengeBits: number;
}

export interface ApiErrorBody {
  error: string;
  detail: string;
}

export class ApiError extends Error {
  constructor(readonly status: number, readonly name: string,
              readonly detail: string) {
    super(`${name}: ${detail}`);
  }
}

export interface PollDetail {
  pollId: string;
  name: string;
  description: string;
  options: string[];
  creator: string;
  status: "Created" | "Open" | "Closed";
  isOpenToAll: boolean;
  registeredVoters: string[];
  voteCount: string;
  counts: string[];
  result: string | null;
  eligible?: boolean;
  hasVoted?: boolean;
}

export interface PollResults {
  pollId: string;
  status: string;
  result: { index: string; option: string } | null;
  counts?: string[];
}

export interface SignerIdentity {
  permanentId: string;
  prover: Prover;
}

export class ApiClient {
  private params: ServiceParams | null = null;

  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
    private readonly onRequest?: (req: CapturedRequest) => void,
  ) {}

  private async request(method: string, path: string, body: string | null,
                        headers: Record<string, string> = {}): Promise<unknown> {
    if (body !== null && !headers["Content-Type"]) {
      headers["Content-Type"] = "application/json";
    }
    this.onRequest?.({ method, path, body: body ?? "", headers: { ...headers } });
    const resp = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers,
      body: body ?? undefined,
    });
    const text = await resp.text();
    const parsed = text ? JSON.parse(text) : {};
    if (!resp.ok) {
      const err = parsed as ApiErrorBody;
      throw new ApiError(resp.status, err.error ?? "HTTPError", err.detail ?? text);
    }
    return parsed;
  }

  private get(path: string): Promise<unknown> {
    return this.request("GET", path, null);
  }

  private post(path: string, body: unknown): Promise<unknown> {
    return this.request("POST", path, JSON.stringify(body));
  }

  /** Fetch and cache the group parameters and protocol configuration. */
  async serviceParams(): Promise<ServiceParams> {
    if (this.params === null) {
      const raw = await this.get("/params") as Record<string, string>;
      this.params = {
        group: { p: BigInt(raw.p), q: BigInt(raw.q), g: BigInt(raw.g) },
        groupName: raw.group,
        rounds: parseInt(raw.rounds, 10),
        challengeBits: parseInt(raw.challengeBits, 10),
      };
    }
    return this.params;
  }

  // -- registration ------------------------------------------------------

  async registerRequest(userInfo: Uint8Array, device: Uint8Array):
      Promise<{ requestId: string; tmpKey: string }> {
    return await this.post("/register/request", {
      userInfo: bytesToHex(userInfo),
      deviceCredentials: bytesToHex(device),
    }) as { requestId: string; tmpKey: string };
  }

  async issueUnvId(requestId: string, publicKey: bigint): Promise<string> {
    const out = await this.post("/register/unvid", {
      requestId, publicKey: bigIntToHex(publicKey),
    }) as { unvId: string };
    return out.unvId;
  }

  async beginSession(unvId: string): Promise<string> {
    const out = await this.post("/register/session", { unvId }) as
      { sessionId: string };
    return out.sessionId;
  }

  async sendCommitments(sessionId: string, commitments: bigint[]): Promise<void> {
    await this.post("/register/commit", {
      sessionId, commitments: commitments.map(bigIntToHex),
    });
  }

  async getChallenges(sessionId: string): Promise<bigint[]> {
    const out = await this.get(`/register/challenge/${sessionId}`) as
      { challenges: string[] };
    return out.challenges.map(BigInt);
  }

  async sendAnswers(sessionId: string, answers: bigint[],
                    challenges: bigint[]): Promise<void> {
    await this.post("/register/respond", {
      sessionId,
      answers: answers.map((s) => s.toString(10)),
      challenges: challenges.map((c) => c.toString(10)),
    });
  }

  async verifySession(sessionId: string):
      Promise<{ verdict: string; permanentId: string; reportHash: string }> {
    return await this.post("/register/verify", { sessionId }) as
      { verdict: string; permanentId: string; reportHash: string };
  }

  // -- authenticated poll operations ----------------------------------------

  private async authedPost(identity: SignerIdentity, path: string,
                           body: unknown): Promise<unknown> {
    const raw = JSON.stringify(body);
    const params = await this.serviceParams();
    const encoder = new TextEncoder();
    const bodyDigest = await sha256(encoder.encode(raw));
    const tag = new Uint8Array([
      ...encoder.encode("POST"), 0x0a,
      ...encoder.encode(path), 0x0a,
      ...bodyDigest,
    ]);
    const proof: NIProof = await identity.prover.proveNonInteractive(
      tag, params.rounds, params.challengeBits);
    return this.request("POST", path, raw, {
      "X-Caller-Id": identity.permanentId,
      "X-Auth-Proof": JSON.stringify({
        d: proof.commitments.map(bigIntToHex),
        s: proof.answers.map((s) => s.toString(10)),
      }),
    });
  }

  async createPoll(identity: SignerIdentity, name: string, description: string,
                   options: string[]): Promise<string> {
    const out = await this.authedPost(identity, "/polls",
                                      { name, description, options }) as
      { pollId: string };
    return out.pollId;
  }

  async registerVoters(identity: SignerIdentity, pollId: string,
                       voters: string[]): Promise<number> {
    const out = await this.authedPost(identity, `/polls/${pollId}/voters`,
                                      { voters }) as { registered: string };
    return parseInt(out.registered, 10);
  }

  async setOpen(identity: SignerIdentity, pollId: string): Promise<void> {
    await this.authedPost(identity, `/polls/${pollId}/set-open`, {});
  }

  async openPoll(identity: SignerIdentity, pollId: string): Promise<void> {
    await this.authedPost(identity, `/polls/${pollId}/open`, {});
  }

  async castVote(identity: SignerIdentity, pollId: string, choice: number):
      Promise<{ txId: string; status: string }> {
    return await this.authedPost(identity, `/polls/${pollId}/votes`, {
      choice: String(choice),
    }) as { txId: string; status: string };
  }

  async closePoll(identity: SignerIdentity, pollId: string):
      Promise<{ result: string; option: string }> {
    return await this.authedPost(identity, `/polls/${pollId}/close`, {}) as
      { result: string; option: string };
  }

  // -- reads -------------------------------------------------------------------

  async pollDetail(pollId: string, asVoter?: string): Promise<PollDetail> {
    const suffix = asVoter ? `?as=${encodeURIComponent(asVoter)}` : "";
    return await this.get(`/polls/${pollId}${suffix}`) as PollDetail;
  }

  async pollResults(pollId: string): Promise<PollResults> {
    return await this.get(`/polls/${pollId}/results`) as PollResults;
  }

  async health(): Promise<boolean> {
    try {
      const out = await this.get("/health") as { status: string };
      return out.status === "ok";
    } catch {
      return false;
    }
  }
}

export function parsePublicKeyHex(hex: string): bigint {
  return hexToBigInt(hex);
}
