/**
 * Browser bootstrap: wires the flows and renderers into the page. Service
 * URL comes from the ?service= query parameter, falling back to the page
 * origin. All in-flight controls are disabled optimistically.
 */

import { ApiClient, ApiError } from "./api.js";
import {
  ballotFlow,
  creatorDashboard,
  fetchPollView,
  pollWatcher,
  registrationWizard,
  signerFor,
  Watcher,
} from "./flows.js";
import { BrowserKeystore } from "./keystore.js";
import {
  renderBallot,
  renderError,
  renderIdentityPanel,
  renderPollCard,
  renderReceipt,
  renderResults,
} from "./render.js";
import { identityPanel, IdentityStage, validatePollForm } from "./viewmodel.js";

function serviceUrl(): string {
  const fromQuery = new URLSearchParams(location.search).get("service");
  return (fromQuery ?? location.origin).replace(/\/$/, "");
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const api = new ApiClient(serviceUrl());
const keystore = new BrowserKeystore(localStorage);
const watchers = new Map<string, Watcher>();

function showError(err: unknown): void {
  const box = el("errors");
  if (err instanceof ApiError) {
    box.innerHTML = renderError(err.name, err.detail);
  } else {
    box.innerHTML = renderError("Error", String(err));
  }
}

function refreshIdentity(stage?: IdentityStage, detail?: string): void {
  const stored = keystore.load();
  const inferred: IdentityStage = stored?.permanentId ? "Verified"
    : stored?.unvId ? "Unverified"
    : stored?.requestId ? "Requested"
    : "None";
  el("identity-panel").innerHTML = renderIdentityPanel(
    identityPanel(stage ?? inferred, stored?.permanentId ?? null, detail ?? ""));
}

async function viewerId(): Promise<string | null> {
  return keystore.load()?.permanentId ?? null;
}

async function watchPoll(pollId: string): Promise<void> {
  const viewer = await viewerId();
  const card = document.createElement("div");
  card.id = `poll-${pollId}`;
  el("polls").appendChild(card);
  const watcher = pollWatcher(api, pollId, viewer, (view) => {
    card.innerHTML = renderPollCard(view) + renderBallot(view)
      + renderResults(view);
    const form = card.querySelector<HTMLFormElement>("form.ballot");
    form?.addEventListener("submit", (event) => {
      event.preventDefault();
      const choice = form.querySelector<HTMLInputElement>(
        "input[name=choice]:checked");
      if (!choice) return;
      void castBallot(pollId, parseInt(choice.value, 10), card);
    });
  });
  watchers.set(pollId, watcher);
  await watcher.refresh();
  watcher.start();
}

async function castBallot(pollId: string, choice: number,
                          card: HTMLElement): Promise<void> {
  try {
    const stored = keystore.load();
    if (!stored) throw new Error("register first");
    const params = await api.serviceParams();
    const signer = signerFor(api, stored, params.group);
    const { txId, view } = await ballotFlow(api, signer, pollId, choice);
    card.innerHTML = renderPollCard(view) + renderReceipt(txId)
      + renderResults(view);
  } catch (err) {
    if (err instanceof ApiError
        && (err.name === "AlreadyVoted" || err.name === "PollNotOpen")) {
      // terminal states, not retries
      card.insertAdjacentHTML("beforeend", renderError(err.name, err.detail));
      await watchers.get(pollId)?.refresh();
    } else {
      showError(err);
    }
  }
}

function bind(): void {
  refreshIdentity();

  el<HTMLButtonElement>("register-btn").addEventListener("click", () => {
    const name = el<HTMLInputElement>("register-name").value.trim();
    if (!name) return;
    registrationWizard(api, keystore, name, {
      onStage: (stage, detail) => refreshIdentity(stage, detail),
    }).catch(showError);
  });

  el<HTMLButtonElement>("create-btn").addEventListener("click", async () => {
    try {
      const name = el<HTMLInputElement>("poll-name").value;
      const description = el<HTMLInputElement>("poll-description").value;
      const options = el<HTMLTextAreaElement>("poll-options").value
        .split("\n").map((s) => s.trim()).filter((s) => s.length > 0);
      const problem = validatePollForm(name, options);
      if (problem) {
        el("create-error").innerHTML = renderError("BadOptions", problem);
        return;
      }
      el("create-error").innerHTML = "";
      const stored = keystore.load();
      if (!stored) throw new Error("register first");
      const params = await api.serviceParams();
      const dash = creatorDashboard(api, signerFor(api, stored, params.group));
      const pollId = await dash.create(name, description, options);
      const voters = el<HTMLTextAreaElement>("poll-voters").value
        .split("\n").map((s) => s.trim()).filter((s) => s.length > 0);
      if (voters.length > 0) {
        await dash.registerVoters(pollId, voters);
      }
      if (el<HTMLInputElement>("poll-open-to-all").checked) {
        await dash.setOpen(pollId);
      }
      await dash.open(pollId);
      await watchPoll(pollId);
    } catch (err) {
      showError(err);
    }
  });

  el<HTMLButtonElement>("track-btn").addEventListener("click", () => {
    const pollId = el<HTMLInputElement>("track-poll-id").value.trim();
    if (pollId && !watchers.has(pollId)) {
      watchPoll(pollId).catch(showError);
    }
  });
}

document.addEventListener("DOMContentLoaded", bind);
