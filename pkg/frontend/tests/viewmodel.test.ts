import { describe, expect, it } from "vitest";

import { PollDetail, PollResults } from "../src/api.js";
import { derivePollView, validatePollForm } from "../src/viewmodel.js";

function detail(overrides: Partial<PollDetail> = {}): PollDetail {
  return {
    pollId: "poll-0",
    name: "lunch",
    description: "",
    options: ["a", "b"],
    creator: "creator-id",
    status: "Open",
    isOpenToAll: false,
    registeredVoters: ["voter-id"],
    voteCount: "0",
    counts: ["0", "0"],
    result: null,
    eligible: true,
    hasVoted: false,
    ...overrides,
  };
}

const closedResults: PollResults = {
  pollId: "poll-0",
  status: "Closed",
  result: { index: "1", option: "b" },
  counts: ["1", "2"],
};

describe("ballot visibility", () => {
  it("shown when open, eligible, not voted", () => {
    const view = derivePollView(detail(), null, "voter-id");
    expect(view.showBallot).toBe(true);
    expect(view.showResults).toBe(false);
  });

  it("hidden once voted", () => {
    const view = derivePollView(detail({ hasVoted: true }), null, "voter-id");
    expect(view.showBallot).toBe(false);
  });

  it("hidden for ineligible viewers", () => {
    const view = derivePollView(detail({ eligible: false }), null, "other");
    expect(view.showBallot).toBe(false);
  });

  it("hidden while Created and once Closed", () => {
    expect(derivePollView(detail({ status: "Created" }), null, "voter-id")
      .showBallot).toBe(false);
    expect(derivePollView(detail({ status: "Closed" }), closedResults, "voter-id")
      .showBallot).toBe(false);
  });
});

describe("results visibility", () => {
  it("only rendered when closed", () => {
    const open = derivePollView(detail(), null, "voter-id");
    expect(open.showResults).toBe(false);
    const closed = derivePollView(
      detail({ status: "Closed", counts: ["1", "2"] }), closedResults, "voter-id");
    expect(closed.showResults).toBe(true);
    expect(closed.winning).toEqual({ index: 1, option: "b" });
  });
});

describe("creator controls", () => {
  it("never enables an action whose precondition is known-false", () => {
    const created = derivePollView(detail({ status: "Created" }), null,
                                   "creator-id");
    expect(created.canRegisterVoters).toBe(true);
    expect(created.canOpen).toBe(true);
    expect(created.canClose).toBe(false);

    const open = derivePollView(detail(), null, "creator-id");
    expect(open.canRegisterVoters).toBe(false);
    expect(open.canOpen).toBe(false);
    expect(open.canClose).toBe(true);

    const closed = derivePollView(detail({ status: "Closed" }), closedResults,
                                  "creator-id");
    expect(closed.canClose).toBe(false);
    expect(closed.canOpen).toBe(false);
  });

  it("open requires voters or open-to-all", () => {
    const empty = derivePollView(
      detail({ status: "Created", registeredVoters: [] }), null, "creator-id");
    expect(empty.canOpen).toBe(false);
    const openToAll = derivePollView(
      detail({ status: "Created", registeredVoters: [], isOpenToAll: true }),
      null, "creator-id");
    expect(openToAll.canOpen).toBe(true);
  });

  it("non-creators get no management controls", () => {
    const view = derivePollView(detail({ status: "Created" }), null, "voter-id");
    expect(view.canRegisterVoters || view.canOpen || view.canClose
      || view.canSetOpen).toBe(false);
  });
});

describe("poll form validation", () => {
  it("mirrors the server's option rules", () => {
    expect(validatePollForm("p", ["a", "b"])).toBeNull();
    expect(validatePollForm("p", ["a"])).toMatch(/two options/);
    expect(validatePollForm("p", ["a", "a"])).toMatch(/distinct/);
    expect(validatePollForm("", ["a", "b"])).toMatch(/name/);
    expect(validatePollForm("p", ["a", " ", "b"])).toBeNull();
  });
});
