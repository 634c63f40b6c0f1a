/**
 * The user journeys, as driveable async state machines: the registration
 * wizard, the ballot flow, the creator's poll management and the 2-second
 * status watcher. The DOM layer renders whatever these emit.
 */

import { ApiClient, SignerIdentity } from "./api.js";
import { BrowserKeystore, StoredIdentity } from "./keystore.js";
import { randomSecret, modPow } from "./mathmod.js";
import { Prover } from "./schnorr.js";
import { derivePollView, IdentityStage, PollView } from "./viewmodel.js";

export interface WizardEvents {
  onStage?: (stage: IdentityStage, detail: string) => void;
}

/** Full registration: request, client-side keypair, unverified id, the
 * interactive proof rounds, permanent id. The secret key is generated here
 * and never leaves the keystore. */
export async function registrationWizard(
  api: ApiClient, keystore: BrowserKeystore, userInfo: string,
  events: WizardEvents = {},
): Promise<StoredIdentity> {
  const params = await api.serviceParams();
  const secret = randomSecret(params.group.q);
  const publicKey = modPow(params.group.g, secret, params.group.p);
  const identity: StoredIdentity = {
    secretKey: secret.toString(10),
    publicKey: publicKey.toString(10),
    requestId: null,
    unvId: null,
    permanentId: null,
  };
  const encoder = new TextEncoder();
  const device = crypto.getRandomValues(new Uint8Array(16));

  const request = await api.registerRequest(encoder.encode(userInfo), device);
  identity.requestId = request.requestId;
  keystore.save(identity);
  events.onStage?.("Requested", `request ${request.requestId}`);

  identity.unvId = await api.issueUnvId(request.requestId, publicKey);
  keystore.save(identity);
  events.onStage?.("Unverified", `unverified id ${identity.unvId}`);

  const prover = new Prover(params.group, secret);
  const sessionId = await api.beginSession(identity.unvId);
  const commitments = prover.commit(params.rounds);
  await api.sendCommitments(sessionId, commitments);
  const challenges = await api.getChallenges(sessionId);
  const answers = prover.respond(challenges);
  await api.sendAnswers(sessionId, answers, challenges);
  const verdict = await api.verifySession(sessionId);

  identity.permanentId = verdict.permanentId;
  keystore.save(identity);
  events.onStage?.("Verified", `permanent id ${verdict.permanentId}`);
  return identity;
}

export function signerFor(api: ApiClient, identity: StoredIdentity,
                          groupParams: { p: bigint; q: bigint; g: bigint }):
    SignerIdentity {
  if (identity.permanentId === null) {
    throw new Error("identity is not verified yet");
  }
  return {
    permanentId: identity.permanentId,
    prover: new Prover(groupParams, BigInt(identity.secretKey)),
  };
}

/** Cast a ballot; returns the ledger receipt and the refreshed view. */
export async function ballotFlow(api: ApiClient, signer: SignerIdentity,
                                 pollId: string, choice: number):
    Promise<{ txId: string; view: PollView }> {
  const receipt = await api.castVote(signer, pollId, choice);
  const view = await fetchPollView(api, pollId, signer.permanentId);
  return { txId: receipt.txId, view };
}

export async function fetchPollView(api: ApiClient, pollId: string,
                                    viewerId: string | null): Promise<PollView> {
  const detail = await api.pollDetail(pollId, viewerId ?? undefined);
  const results = detail.status === "Closed" ? await api.pollResults(pollId) : null;
  return derivePollView(detail, results, viewerId);
}

export interface DashboardApi {
  create(name: string, description: string, options: string[]): Promise<string>;
  registerVoters(pollId: string, voters: string[]): Promise<number>;
  setOpen(pollId: string): Promise<void>;
  open(pollId: string): Promise<void>;
  close(pollId: string): Promise<{ result: string; option: string }>;
}

export function creatorDashboard(api: ApiClient,
                                 signer: SignerIdentity): DashboardApi {
  return {
    create: (name, description, options) =>
      api.createPoll(signer, name, description, options),
    registerVoters: (pollId, voters) => api.registerVoters(signer, pollId, voters),
    setOpen: (pollId) => api.setOpen(signer, pollId),
    open: (pollId) => api.openPoll(signer, pollId),
    close: (pollId) => api.closePoll(signer, pollId),
  };
}

export interface Watcher {
  refresh(): Promise<PollView>;
  start(): void;
  stop(): void;
}

/** Status freshness by periodic polling (default 2 s). */
export function pollWatcher(api: ApiClient, pollId: string,
                            viewerId: string | null,
                            onUpdate: (view: PollView) => void,
                            intervalMs = 2000): Watcher {
  let timer: ReturnType<typeof setInterval> | null = null;
  const refresh = async () => {
    const view = await fetchPollView(api, pollId, viewerId);
    onUpdate(view);
    return view;
  };
  return {
    refresh,
    start() {
      if (timer === null) {
        timer = setInterval(() => void refresh().catch(() => undefined),
                            intervalMs);
      }
    },
    stop() {
      if (timer !== null) {
        clearInterval(timer);
        timer = null;
      }
    },
  };
}
