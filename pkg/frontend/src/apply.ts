// Render an engine outcome onto the live page. This module never decides
// anything: every hide, reorder, overlay, and cue comes from the outcome
// document verbatim. Rendering is idempotent per page load because actions
// are keyed to extracted nodes.

import type { ElementActionWire, OutcomeWire } from "./wire";

export interface RenderSummary {
  hidden: number;
  // Text for the toolbar badge; null when the outcome carries no badge cue.
  badgeText: string | null;
  // Action ids that no longer resolved to a node (page mutated under us).
  staleIds: string[];
}

const HIDDEN_ATTR = "data-oos-hidden";
const OVERLAY_ATTR = "data-oos-overlay";

function renderOverlay(doc: Document, node: Element, action: ElementActionWire): void {
  if (node.hasAttribute(OVERLAY_ATTR)) {
    return;
  }
  node.setAttribute(OVERLAY_ATTR, "");
  const veil = doc.createElement("div");
  veil.className = "oos-overlay";
  veil.textContent = action.message_text ?? "";
  node.appendChild(veil);
}

function renderCta(doc: Document, node: Element, action: ElementActionWire): void {
  const note = doc.createElement("div");
  note.className = "oos-cta";
  const prompt = doc.createElement("p");
  prompt.textContent = action.prompt_text ?? "";
  note.appendChild(prompt);
  if (action.mailto_link !== undefined) {
    const link = doc.createElement("a");
    link.setAttribute("href", action.mailto_link);
    link.textContent = "Email the company";
    note.appendChild(link);
  }
  node.appendChild(note);
}

export function applyOutcome(
  doc: Document,
  outcome: OutcomeWire,
  nodes: Map<string, Element>,
): RenderSummary {
  const staleIds: string[] = [];
  const moved: { node: Element; rank: number }[] = [];
  let hidden = 0;

  for (const action of outcome.page_actions) {
    const node = nodes.get(action.element_id);
    if (node === undefined || !node.isConnected) {
      if (action.kind !== "keep") {
        staleIds.push(action.element_id);
      }
      continue;
    }
    switch (action.kind) {
      case "keep":
        break;
      case "remove":
        (node as HTMLElement).style.display = "none";
        node.setAttribute(HIDDEN_ATTR, "");
        hidden += 1;
        break;
      case "move_to_bottom":
        moved.push({ node, rank: action.new_rank ?? Number.MAX_SAFE_INTEGER });
        break;
      case "overlay":
        renderOverlay(doc, node, action);
        break;
      case "annotate_cta":
        renderCta(doc, node, action);
        break;
    }
  }

  // Reordering: appending in ascending target rank lands every moved node
  // after its untouched siblings, in outcome order.
  moved.sort((a, b) => a.rank - b.rank);
  for (const { node } of moved) {
    node.parentElement?.appendChild(node);
  }

  let badgeText: string | null = null;
  const cueBox = doc.createElement("div");
  cueBox.className = "oos-cues";
  for (const cue of outcome.injected_cues) {
    if (cue.kind === "badge_count") {
      badgeText = cue.text;
      continue;
    }
    const row = doc.createElement("div");
    row.className = cue.kind === "hidden_banner" ? "oos-banner" : "oos-whitelist-prompt";
    row.textContent = cue.text;
    cueBox.appendChild(row);
  }
  doc.querySelector(".oos-cues")?.remove();
  if (cueBox.childNodes.length > 0) {
    doc.body.prepend(cueBox);
  }

  return { hidden, badgeText, staleIds };
}
