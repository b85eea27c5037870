// Entry point: wires controllers to the page, the keyboard, and the
// service base-URL box.

import { ApiClient } from "./api.js";
import { AgreementController, AnnotateController, TriageController } from "./controllers.js";
import { renderAgreement, renderAnnotate, renderOffline, renderTriage } from "./dom.js";

type Tab = "triage" | "annotate" | "agreement";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function defaultBaseUrl(): string {
  const saved = localStorage.getItem("adaudit.baseUrl");
  if (saved) return saved;
  // when served by the service itself under /ui, the API is same-origin
  return window.location.pathname.startsWith("/ui")
    ? window.location.origin
    : "http://127.0.0.1:8000";
}

async function boot(): Promise<void> {
  const baseInput = el<HTMLInputElement>("base-url");
  const reviewerInput = el<HTMLInputElement>("reviewer");
  const content = el<HTMLDivElement>("content");
  baseInput.value = defaultBaseUrl();
  reviewerInput.value = localStorage.getItem("adaudit.reviewer") ?? "reviewer-1";

  let tab: Tab = "triage";
  let api = new ApiClient(baseInput.value);
  let triage = new TriageController(api, reviewerInput.value, (s) => tab === "triage" && renderTriage(content, s));
  let annotate = new AnnotateController(api, reviewerInput.value, (s) => tab === "annotate" && renderAnnotate(content, s, reviewerInput.value));
  let agreement = new AgreementController(api, (v) => tab === "agreement" && renderAgreement(content, v));

  async function showTab(next: Tab): Promise<void> {
    tab = next;
    for (const name of ["triage", "annotate", "agreement"] as Tab[]) {
      el(`tab-${name}`).classList.toggle("active", name === next);
    }
    try {
      if (next === "triage") {
        await triage.load();
      } else if (next === "annotate") {
        await annotate.load();
      } else {
        renderAgreement(content, agreement.view);
      }
    } catch (err) {
      renderOffline(content, String(err));
    }
  }

  async function reconnect(): Promise<void> {
    localStorage.setItem("adaudit.baseUrl", baseInput.value);
    localStorage.setItem("adaudit.reviewer", reviewerInput.value);
    api = new ApiClient(baseInput.value);
    triage = new TriageController(api, reviewerInput.value, (s) => tab === "triage" && renderTriage(content, s));
    annotate = new AnnotateController(api, reviewerInput.value, (s) => tab === "annotate" && renderAnnotate(content, s, reviewerInput.value));
    agreement = new AgreementController(api, (v) => tab === "agreement" && renderAgreement(content, v));
    await showTab(tab);
  }

  el("tab-triage").addEventListener("click", () => void showTab("triage"));
  el("tab-annotate").addEventListener("click", () => void showTab("annotate"));
  el("tab-agreement").addEventListener("click", () => void showTab("agreement"));
  el("reconnect").addEventListener("click", () => void reconnect());
  el("agreement-go").addEventListener("click", () => {
    const a = el<HTMLInputElement>("annotator-a").value.trim();
    const b = el<HTMLInputElement>("annotator-b").value.trim();
    if (a && b) void agreement.fetchPair(a, b);
  });

  document.addEventListener("keydown", (ev) => {
    if (ev.target instanceof HTMLInputElement) return;
    if (tab === "triage") void triage.handleKey(ev.key);
    else if (tab === "annotate") void annotate.handleKey(ev.key);
  });

  await showTab("triage");
}

void boot();
