/**
 * View computation and DOM rendering for annotated documents.
 *
 * The renderer's hard invariant: the rendered text content equals the
 * submitted text exactly.  Every character is emitted exactly once as a text
 * node; highlights only ever wrap, never mutate.  Nested spans render as
 * nested markup; a partially overlapping span is split at the boundary, the
 * same way browsers repair misnested inline tags.
 */
import type {
  AnnotationView,
  ClusterHighlight,
  DocumentJson,
  Highlight,
  RoleHighlight,
  SpanJson,
  TriggerHighlight,
} from "./types.js";

/** Cluster colors cycle through this palette (documented limit). */
export const PALETTE = [
  "#ffe08a",
  "#b5e8b0",
  "#bcd9ff",
  "#f6c3e5",
  "#ffd1b3",
  "#d7ccff",
  "#c2ecec",
  "#e6e6a8",
];

/** UTF-16 index of each code-point index (plus one terminal entry). */
export function codePointIndex(text: string): number[] {
  const table = [0];
  let units = 0;
  for (const ch of text) {
    units += ch.length;
    table.push(units);
  }
  return table;
}

function charRange(doc: DocumentJson, span: SpanJson): [number, number] {
  const tokenization = doc.tokenizations.find((t) => t.id === span.tokenization_id);
  if (!tokenization) {
    throw new Error(`highlight references unknown tokenization ${span.tokenization_id}`);
  }
  const first = tokenization.tokens[span.start_token];
  const last = tokenization.tokens[span.end_token - 1];
  if (!first || !last || span.start_token >= span.end_token) {
    throw new Error(`highlight span [${span.start_token},${span.end_token}) is out of range`);
  }
  return [first[1], last[2]];
}

export interface ViewOptions {
  runCoref: boolean;
}

/** Project an annotated document onto highlight lists for rendering. */
export function computeView(doc: DocumentJson, options: ViewOptions = { runCoref: true }): AnnotationView {
  const mentionById = new Map(doc.mentions.map((m) => [m.id, m]));

  const triggers: TriggerHighlight[] = [];
  const roles: RoleHighlight[] = [];
  for (const frame of doc.frames) {
    const trigger = mentionById.get(frame.trigger);
    if (!trigger) throw new Error(`frame ${frame.id} trigger does not resolve`);
    const roleInfos = frame.roles.map(([label, mentionId]) => {
      const argument = mentionById.get(mentionId);
      if (!argument) throw new Error(`frame ${frame.id} role ${label} does not resolve`);
      return { label, mention: argument };
    });
    // Role-less frames are entity mentions, not event triggers; they are
    // reachable through clusters and mention hovers instead.
    if (roleInfos.length > 0) {
      const [start, end] = charRange(doc, trigger.span);
      triggers.push({
        start,
        end,
        frameId: frame.id,
        frameLabel: frame.frame_label,
        roles: roleInfos.map((r) => ({ label: r.label, surface: r.mention.surface })),
      });
      for (const { label, mention } of roleInfos) {
        const [rs, re] = charRange(doc, mention.span);
        roles.push({ start: rs, end: re, roleLabel: label, frameId: frame.id, frameLabel: frame.frame_label });
      }
    }
  }

  const clusterMentions: ClusterHighlight[] = [];
  const clusterColors = new Map<string, number>();
  if (options.runCoref) {
    let colorIndex = 0;
    for (const cluster of doc.clusters) {
      if (cluster.mention_ids.length < 2) continue; // singletons stay undecorated
      clusterColors.set(cluster.id, colorIndex % PALETTE.length);
      const members = cluster.mention_ids.map((id) => {
        const mention = mentionById.get(id);
        if (!mention) throw new Error(`cluster ${cluster.id} member ${id} does not resolve`);
        return mention;
      });
      for (const mention of members) {
        const [start, end] = charRange(doc, mention.span);
        clusterMentions.push({
          start,
          end,
          clusterId: cluster.id,
          colorIndex: colorIndex % PALETTE.length,
          members: members.map((m) => m.surface),
        });
      }
      colorIndex += 1;
    }
  }

  return { text: doc.text, triggers, roles, clusterMentions, clusterColors };
}

const KIND_PRIORITY = { mention: 0, role: 1, trigger: 2 } as const;

function asHighlights(view: AnnotationView): Highlight[] {
  const highlights: Highlight[] = [];
  for (const t of view.triggers) {
    const detail = t.roles.map((r) => `${r.label}: ${r.surface}`).join("; ");
    highlights.push({
      start: t.start,
      end: t.end,
      kind: "trigger",
      cssClass: "hl-trigger",
      title: detail ? `${t.frameLabel}: ${detail}` : t.frameLabel,
    });
  }
  for (const r of view.roles) {
    highlights.push({
      start: r.start,
      end: r.end,
      kind: "role",
      cssClass: "hl-role",
      title: `${r.frameLabel}.${r.roleLabel}`,
    });
  }
  for (const c of view.clusterMentions) {
    highlights.push({
      start: c.start,
      end: c.end,
      kind: "mention",
      cssClass: "hl-mention",
      title: `cluster ${c.clusterId}: ${c.members.join(" | ")}`,
      color: PALETTE[c.colorIndex],
    });
  }
  return highlights.sort(
    (a, b) => a.start - b.start || b.end - a.end || KIND_PRIORITY[a.kind] - KIND_PRIORITY[b.kind],
  );
}

function makeElement(box: Highlight, clusterIndexOf: (color: string | undefined) => string | null): HTMLElement {
  const el = document.createElement("span");
  el.className = box.cssClass;
  el.title = box.title;
  if (box.color) {
    el.style.backgroundColor = box.color;
    const idx = clusterIndexOf(box.color);
    if (idx !== null) el.dataset.cluster = idx;
  }
  el.dataset.kind = box.kind;
  return el;
}

/**
 * Render the view into `container` (cleared first).  Uses a boundary sweep
 * with an open-highlight stack, so containment nests and partial overlaps
 * split without ever duplicating or dropping a character.
 */
export function renderView(container: HTMLElement, view: AnnotationView): void {
  container.textContent = "";
  const root = document.createElement("div");
  root.className = "annotated-text";
  container.appendChild(root);

  const text = view.text;
  const cp = codePointIndex(text);
  const total = cp.length - 1; // code points in text
  const colorToIndex = new Map(Array.from(view.clusterColors.values()).map((i) => [PALETTE[i], String(i)]));
  const boxes = asHighlights(view).filter((b) => b.start < b.end && b.start >= 0 && b.end <= total);

  const boundaries = new Set<number>([0, total]);
  for (const b of boxes) {
    boundaries.add(b.start);
    boundaries.add(b.end);
  }
  const points = Array.from(boundaries).sort((a, b) => a - b);

  interface Open {
    box: Highlight;
    el: HTMLElement;
  }
  const stack: Open[] = [];
  const host = (): HTMLElement => (stack.length ? stack[stack.length - 1].el : root);
  const openBox = (box: Highlight) => {
    const el = makeElement(box, (color) => colorToIndex.get(color ?? "") ?? null);
    host().appendChild(el);
    stack.push({ box, el });
  };

  let next = 0; // next unopened box index
  for (let p = 0; p < points.length; p += 1) {
    const at = points[p];
    // close highlights ending here; anything still open above them reopens
    const reopen: Highlight[] = [];
    while (stack.some((o) => o.box.end === at)) {
      const top = stack.pop()!;
      if (top.box.end !== at) reopen.push(top.box);
    }
    for (const box of reopen.reverse()) openBox(box);
    // open highlights starting here, longest (then outermost kind) first
    while (next < boxes.length && boxes[next].start === at) {
      openBox(boxes[next]);
      next += 1;
    }
    if (p + 1 < points.length) {
      const until = points[p + 1];
      host().appendChild(document.createTextNode(text.slice(cp[at], cp[until])));
    }
  }
}
