// DOM rendering. Controllers push state here; nothing in this file computes
// a number that did not come from the service.

import { formatAgreementPct, formatKappa, formatScore, formatTallies } from "./format.js";
import type { AnnotateState, TriageState } from "./state.js";
import type { AgreementView } from "./controllers.js";

function esc(s: string | null): string {
  return (s ?? "").replace(/[&<>"]/g, (c) => ({ "&": "&amp;", "<": "&lt;", ">": "&gt;", '"': "&quot;" })[c]!);
}

export const ANNOTATION_GUIDANCE =
  "Label an ad as political when it promotes candidates, parties or " +
  "campaigns, or argues about elections, government action, public policy, " +
  "rights, or justice. Commercial and personal content is non-political. " +
  "Pick unsure only when the text alone cannot settle it.";

export function renderTriage(root: HTMLElement, state: TriageState): void {
  const item = state.queue[state.cursor] ?? null;
  const rows = state.queue
    .map((it, i) => {
      const cls = i === state.cursor ? "row selected" : "row";
      return `<div class="${cls}" data-idx="${i}">
        <span class="score">${formatScore(it.score)}</span>
        <span class="advertiser">${esc(it.advertiser_name)}</span>
        <span class="snippet">${esc(it.text.slice(0, 80))}</span>
      </div>`;
    })
    .join("");
  root.innerHTML = `
    <div class="tallies" id="triage-tallies">${formatTallies(state.tallies)}</div>
    ${state.error ? `<div class="error">${esc(state.error)}</div>` : ""}
    <div class="split">
      <div class="list">${rows || '<p class="empty">No flags waiting for review.</p>'}</div>
      <div class="detail">
        ${
          item
            ? `<p class="score-line">score ${formatScore(item.score)} · model ${esc(item.model_id)}</p>
               <p class="advertiser">${esc(item.advertiser_name)}</p>
               <p class="text">${esc(item.text)}</p>
               ${item.disclaimer ? `<p class="disclaimer">${esc(item.disclaimer)}</p>` : ""}
               <p class="hint">1 political · 2 non-political · 3 unsure · j/k move</p>`
            : '<p class="empty">Queue drained.</p>'
        }
      </div>
    </div>`;
}

export function renderAnnotate(root: HTMLElement, state: AnnotateState, annotator: string): void {
  const ad = state.queue[state.cursor] ?? null;
  root.innerHTML = `
    <p class="guidance">${esc(ANNOTATION_GUIDANCE)}</p>
    <p class="progress">annotator <b>${esc(annotator)}</b> · labeled ${state.labeled} · remaining ${state.queue.length}</p>
    ${state.error ? `<div class="error">${esc(state.error)}</div>` : ""}
    <div class="detail">
      ${
        ad
          ? `<p class="advertiser">${esc(ad.advertiser_name)}</p>
             <p class="text">${esc(ad.text)}</p>
             ${ad.disclaimer ? `<p class="disclaimer">${esc(ad.disclaimer)}</p>` : ""}
             <p class="hint">1 political · 2 non-political · 3 unsure · j/k move</p>`
          : '<p class="empty">Nothing left to annotate.</p>'
      }
    </div>`;
}

export function renderAgreement(root: HTMLElement, view: AgreementView): void {
  if (view.error) {
    root.innerHTML = `<div class="error">${esc(view.error)}</div>`;
    return;
  }
  if (!view.report) {
    root.innerHTML = '<p class="empty">Pick two annotators to compare.</p>';
    return;
  }
  const r = view.report;
  root.innerHTML = `
    <p class="kappa">κ = <b id="kappa-value">${esc(formatKappa(r.kappa, r.landis_koch_band))}</b></p>
    <p class="agreement">agreement ${esc(formatAgreementPct(r.agreement_pct))} over ${r.items} shared ads</p>
    <table class="counts">
      <tr><td></td><td>${esc(r.annotators[1] ?? "B")} political</td><td>${esc(r.annotators[1] ?? "B")} non-political</td></tr>
      <tr><td>${esc(r.annotators[0] ?? "A")} political</td><td>${r.counts.both_political}</td><td>${r.counts.a_only_political}</td></tr>
      <tr><td>${esc(r.annotators[0] ?? "A")} non-political</td><td>${r.counts.b_only_political}</td><td>${r.counts.both_non_political}</td></tr>
    </table>`;
}

export function renderOffline(root: HTMLElement, detail: string): void {
  root.innerHTML = `<div class="error">Service unreachable (read-only): ${esc(detail)}</div>`;
}
