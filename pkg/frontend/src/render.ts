/**
 * HTML renderers: pure functions from view models to markup strings, so
 * the panels are testable without a DOM. The UI layer assigns the output
 * to innerHTML and binds events by element id.
 */

import { IdentityPanel, PollView } from "./viewmodel.js";

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

const STAGE_LABELS: Record<string, string> = {
  None: "not registered",
  Requested: "request sent",
  Unverified: "awaiting proof",
  Verified: "verified",
};

export function renderIdentityPanel(panel: IdentityPanel): string {
  const label = STAGE_LABELS[panel.stage] ?? panel.stage;
  const id = panel.permanentId
    ? `<code class="pid">${escapeHtml(panel.permanentId)}</code>`
    : "";
  return `<div class="identity stage-${panel.stage.toLowerCase()}">`
    + `<span class="badge">${escapeHtml(label)}</span> ${id}`
    + (panel.detail ? `<div class="detail">${escapeHtml(panel.detail)}</div>` : "")
    + `</div>`;
}

export function renderStatusBadge(view: PollView): string {
  return `<span class="badge status-${view.status.toLowerCase()}">`
    + `${escapeHtml(view.statusBadge)}</span>`;
}

export function renderPollCard(view: PollView): string {
  const flags: string[] = [];
  if (view.eligible) flags.push("eligible");
  if (view.hasVoted) flags.push("voted");
  if (view.isCreator) flags.push("creator");
  return `<div class="poll-card" data-poll="${escapeHtml(view.pollId)}">`
    + `<h3>${escapeHtml(view.name)}</h3>`
    + renderStatusBadge(view)
    + (flags.length ? `<span class="flags">${flags.join(" · ")}</span>` : "")
    + `<p>${escapeHtml(view.description)}</p>`
    + `</div>`;
}

export function renderBallot(view: PollView): string {
  if (!view.showBallot) {
    return "";
  }
  const options = view.options.map((option, index) =>
    `<label><input type="radio" name="choice" value="${index}">`
    + ` ${escapeHtml(option)}</label>`).join("");
  return `<form class="ballot" data-poll="${escapeHtml(view.pollId)}">`
    + options
    + `<button type="submit" id="cast-vote">cast vote</button>`
    + `</form>`;
}

export function renderResults(view: PollView): string {
  if (!view.showResults) {
    return "";
  }
  const total = view.counts.reduce((a, b) => a + b, 0);
  const rows = view.options.map((option, index) => {
    const count = view.counts[index] ?? 0;
    const winner = view.winning?.index === index;
    return `<li class="${winner ? "winner" : ""}">`
      + `${escapeHtml(option)}: ${count}`
      + (winner ? " ✓" : "")
      + `</li>`;
  }).join("");
  const heading = view.winning
    ? `winner: ${escapeHtml(view.winning.option)}`
    : "no result";
  return `<div class="results"><h4>${heading}</h4>`
    + `<ul>${rows}</ul>`
    + `<div class="total">${total} ballots</div></div>`;
}

export function renderReceipt(txId: string): string {
  return `<div class="receipt">vote recorded — ledger receipt tx `
    + `<code>${escapeHtml(txId)}</code></div>`;
}

export function renderError(name: string, detail: string): string {
  return `<div class="error banner"><strong>${escapeHtml(name)}</strong> `
    + `${escapeHtml(detail)}</div>`;
}
