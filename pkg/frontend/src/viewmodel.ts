/**
 * View-model derivation: what each panel may show, computed purely from
 * the last fetched server state. The UI never enables an action whose
 * server-side precondition is known-false.
 */

import { PollDetail, PollResults } from "./api.js";

export type IdentityStage = "None" | "Requested" | "Unverified" | "Verified";

export interface IdentityPanel {
  stage: IdentityStage;
  permanentId: string | null;
  detail: string;
}

export interface PollView {
  pollId: string;
  name: string;
  description: string;
  options: string[];
  status: "Created" | "Open" | "Closed";
  statusBadge: string;
  eligible: boolean;
  hasVoted: boolean;
  isCreator: boolean;
  counts: number[];
  showBallot: boolean;
  showResults: boolean;
  canOpen: boolean;
  canClose: boolean;
  canRegisterVoters: boolean;
  canSetOpen: boolean;
  winning: { index: number; option: string } | null;
}

export function derivePollView(detail: PollDetail, results: PollResults | null,
                               viewerId: string | null): PollView {
  const eligible = detail.eligible ?? false;
  const hasVoted = detail.hasVoted ?? false;
  const isCreator = viewerId !== null && detail.creator === viewerId;
  const closed = detail.status === "Closed";
  const winning = closed && results?.result
    ? { index: parseInt(results.result.index, 10), option: results.result.option }
    : null;
  return {
    pollId: detail.pollId,
    name: detail.name,
    description: detail.description,
    options: detail.options,
    status: detail.status,
    statusBadge: detail.status,
    eligible,
    hasVoted,
    isCreator,
    counts: detail.counts.map((c) => parseInt(c, 10)),
    // ballot only while Open, for an eligible viewer who has not voted
    showBallot: detail.status === "Open" && eligible && !hasVoted,
    // results only once Closed
    showResults: closed,
    canOpen: isCreator && detail.status === "Created"
      && (detail.registeredVoters.length > 0 || detail.isOpenToAll),
    canClose: isCreator && detail.status === "Open",
    canRegisterVoters: isCreator && detail.status === "Created",
    canSetOpen: isCreator && detail.status === "Created" && !detail.isOpenToAll,
    winning,
  };
}

export function identityPanel(stage: IdentityStage, permanentId: string | null,
                              detail = ""): IdentityPanel {
  return { stage, permanentId, detail };
}

/** Client-side mirror of the server's option rules, for inline form errors. */
export function validatePollForm(name: string, options: string[]): string | null {
  if (!name.trim()) return "poll needs a name";
  const cleaned = options.map((o) => o.trim()).filter((o) => o.length > 0);
  if (cleaned.length < 2) return "at least two options required";
  if (new Set(cleaned).size !== cleaned.length) return "options must be distinct";
  return null;
}
