import { describe, expect, it } from "vitest";

import {
  escapeHtml,
  renderBallot,
  renderError,
  renderIdentityPanel,
  renderPollCard,
  renderReceipt,
  renderResults,
} from "../src/render.js";
import { identityPanel, PollView } from "../src/viewmodel.js";

function view(overrides: Partial<PollView> = {}): PollView {
  return {
    pollId: "poll-0",
    name: "lunch",
    description: "pick one",
    options: ["pizza", "sushi"],
    status: "Open",
    statusBadge: "Open",
    eligible: true,
    hasVoted: false,
    isCreator: false,
    counts: [0, 0],
    showBallot: true,
    showResults: false,
    canOpen: false,
    canClose: false,
    canRegisterVoters: false,
    canSetOpen: false,
    winning: null,
    ...overrides,
  };
}

describe("escapeHtml", () => {
  it("neutralizes markup", () => {
    expect(escapeHtml(`<img src="x">&`)).toBe("&lt;img src=&quot;x&quot;&gt;&amp;");
  });
});

describe("identity panel", () => {
  it("shows the stage badge and permanent id", () => {
    const html = renderIdentityPanel(identityPanel("Verified", "abc123"));
    expect(html).toContain("verified");
    expect(html).toContain("abc123");
  });

  it("escapes injected names", () => {
    const html = renderIdentityPanel(identityPanel("Requested", null,
                                                   "<script>alert(1)</script>"));
    expect(html).not.toContain("<script>");
  });
});

describe("poll card", () => {
  it("renders status badge and flags", () => {
    const html = renderPollCard(view({ hasVoted: true, isCreator: true }));
    expect(html).toContain("status-open");
    expect(html).toContain("voted");
    expect(html).toContain("creator");
  });
});

describe("ballot", () => {
  it("renders one radio per option when visible", () => {
    const html = renderBallot(view());
    expect(html.match(/type="radio"/g)).toHaveLength(2);
    expect(html).toContain("pizza");
    expect(html).toContain("sushi");
  });

  it("renders nothing when hidden", () => {
    expect(renderBallot(view({ showBallot: false }))).toBe("");
  });
});

describe("results", () => {
  it("renders nothing until closed", () => {
    expect(renderResults(view())).toBe("");
  });

  it("highlights the winner with counts", () => {
    const html = renderResults(view({
      status: "Closed", statusBadge: "Closed", showBallot: false,
      showResults: true, counts: [1, 2],
      winning: { index: 1, option: "sushi" },
    }));
    expect(html).toContain("winner: sushi");
    expect(html).toContain("pizza: 1");
    expect(html).toContain("sushi: 2");
    expect(html).toContain("3 ballots");
  });
});

describe("receipt and errors", () => {
  it("shows the ledger receipt", () => {
    expect(renderReceipt("42")).toContain("tx");
    expect(renderReceipt("42")).toContain("42");
  });

  it("renders error banners escaped", () => {
    const html = renderError("AlreadyVoted", "<b>already</b>");
    expect(html).toContain("AlreadyVoted");
    expect(html).not.toContain("<b>");
  });
});
