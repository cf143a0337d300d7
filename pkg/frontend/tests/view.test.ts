import { describe, expect, it } from "vitest";

import { PALETTE, codePointIndex, computeView, renderView } from "../src/view.js";
import { makeDoc, mention } from "./helpers.js";

function render(doc: ReturnType<typeof makeDoc>, runCoref = true): HTMLElement {
  const container = document.createElement("div");
  renderView(container, computeView(doc, { runCoref }));
  return container;
}

describe("computeView", () => {
  it("keeps role-less frames out of the trigger highlights", () => {
    const text = "The rabbit is happy";
    const doc = makeDoc(text, {
      mentions: [mention("m0", 0, 2, "The rabbit")],
      frames: [{ id: "f0", frame_label: "Animals", trigger: "m0", roles: [] }],
    });
    const view = computeView(doc);
    expect(view.triggers).toHaveLength(0);
    expect(view.roles).toHaveLength(0);
  });

  it("collects trigger and role highlights for event frames", () => {
    const text = "The little rabbit eats a carrot";
    const doc = makeDoc(text, {
      mentions: [
        mention("mt", 3, 4, "eats"),
        mention("ma", 0, 3, "The little rabbit"),
        mention("mb", 4, 6, "a carrot"),
      ],
      frames: [
        {
          id: "f0",
          frame_label: "Ingestion",
          trigger: "mt",
          roles: [
            ["Ingestor", "ma"],
            ["Ingestibles", "mb"],
          ],
        },
      ],
    });
    const view = computeView(doc);
    expect(view.triggers).toHaveLength(1);
    expect(view.triggers[0].frameLabel).toBe("Ingestion");
    expect(view.roles.map((r) => r.roleLabel)).toEqual(["Ingestor", "Ingestibles"]);
  });

  it("skips singleton clusters and honours the coref toggle", () => {
    const text = "a b c";
    const doc = makeDoc(text, {
      mentions: [mention("m0", 0, 1, "a"), mention("m1", 1, 2, "b"), mention("m2", 2, 3, "c")],
      clusters: [
        { id: "c0", mention_ids: ["m0", "m2"] },
        { id: "c1", mention_ids: ["m1"] },
      ],
    });
    expect(computeView(doc, { runCoref: true }).clusterMentions).toHaveLength(2);
    expect(computeView(doc, { runCoref: true }).clusterColors.size).toBe(1);
    expect(computeView(doc, { runCoref: false }).clusterMentions).toHaveLength(0);
  });

  it("rejects highlights whose spans do not resolve", () => {
    const doc = makeDoc("a b", {
      mentions: [{ id: "m0", span: { tokenization_id: "nope", start_token: 0, end_token: 1 }, surface: "a" }],
      clusters: [{ id: "c0", mention_ids: ["m0", "m0x"] }],
    });
    expect(() => computeView(doc)).toThrow();
  });
});

describe("renderView", () => {
  it("renders plain text when there are no annotations", () => {
    const text = "nothing to see\nhere at all";
    const container = render(makeDoc(text));
    expect(container.textContent).toBe(text);
    expect(container.querySelectorAll("span").length).toBe(0);
  });

  it("never mutates the text, including astral characters", () => {
    const text = "🐇 eats 東京 carrots\nplain tail";
    const doc = makeDoc(text, {
      mentions: [mention("mt", 1, 2, "eats"), mention("ma", 0, 1, "🐇"), mention("mb", 3, 4, "carrots")],
      frames: [
        {
          id: "f0",
          frame_label: "Ingestion",
          trigger: "mt",
          roles: [
            ["Ingestor", "ma"],
            ["Ingestibles", "mb"],
          ],
        },
      ],
    });
    const container = render(doc);
    expect(container.textContent).toBe(text);
    const trigger = container.querySelector('[data-kind="trigger"]')!;
    expect(trigger.textContent).toBe("eats");
    const roles = container.querySelectorAll('[data-kind="role"]');
    expect(Array.from(roles, (r) => r.textContent)).toEqual(["🐇", "carrots"]);
  });

  it("gives two clusters two distinct colors and one color per cluster", () => {
    const text = "a b a b";
    const doc = makeDoc(text, {
      mentions: [
        mention("m0", 0, 1, "a"),
        mention("m1", 1, 2, "b"),
        mention("m2", 2, 3, "a"),
        mention("m3", 3, 4, "b"),
      ],
      clusters: [
        { id: "c0", mention_ids: ["m0", "m2"] },
        { id: "c1", mention_ids: ["m1", "m3"] },
      ],
    });
    const container = render(doc);
    const byCluster = new Map<string, Set<string>>();
    for (const el of container.querySelectorAll<HTMLElement>('[data-kind="mention"]')) {
      const cluster = el.dataset.cluster!;
      if (!byCluster.has(cluster)) byCluster.set(cluster, new Set());
      byCluster.get(cluster)!.add(el.style.backgroundColor);
    }
    expect(byCluster.size).toBe(2);
    const colors = Array.from(byCluster.values(), (set) => {
      expect(set.size).toBe(1); // mentions of one cluster share one color
      return Array.from(set)[0];
    });
    expect(new Set(colors).size).toBe(2);
  });

  it("nests a role inside a trigger span without changing the text", () => {
    const text = "went straight home";
    const doc = makeDoc(text, {
      mentions: [mention("mt", 0, 3, "went straight home"), mention("ma", 1, 2, "straight")],
      frames: [{ id: "f0", frame_label: "Motion", trigger: "mt", roles: [["Manner", "ma"]] }],
    });
    const container = render(doc);
    expect(container.textContent).toBe(text);
    const trigger = container.querySelector('[data-kind="trigger"]')!;
    const nestedRole = trigger.querySelector('[data-kind="role"]');
    expect(nestedRole).not.toBeNull();
    expect(nestedRole!.textContent).toBe("straight");
  });

  it("splits partially overlapping highlights instead of dropping text", () => {
    const text = "one two three four";
    const doc = makeDoc(text, {
      mentions: [
        mention("m0", 0, 2, "one two"),
        mention("m1", 1, 3, "two three"),
        mention("m2", 3, 4, "four"),
      ],
      clusters: [
        { id: "c0", mention_ids: ["m0", "m2"] },
        { id: "c1", mention_ids: ["m1", "m2"] },
      ],
    });
    const container = render(doc);
    expect(container.textContent).toBe(text);
  });

  it("exposes frame and cluster details on hover via title attributes", () => {
    const text = "The little rabbit eats a carrot\nThe rabbit is happy";
    const doc = makeDoc(text, {
      mentions: [
        mention("mt", 3, 4, "eats"),
        mention("ma", 0, 3, "The little rabbit"),
        mention("mb", 4, 6, "a carrot"),
        mention("mc", 6, 8, "The rabbit"),
      ],
      frames: [
        {
          id: "f0",
          frame_label: "Ingestion",
          trigger: "mt",
          roles: [
            ["Ingestor", "ma"],
            ["Ingestibles", "mb"],
          ],
        },
      ],
      clusters: [{ id: "c0", mention_ids: ["ma", "mc"] }],
    });
    const container = render(doc);
    const trigger = container.querySelector<HTMLElement>('[data-kind="trigger"]')!;
    expect(trigger.title).toContain("Ingestion");
    expect(trigger.title).toContain("Ingestor: The little rabbit");
    expect(trigger.title).toContain("Ingestibles: a carrot");
    const role = container.querySelector<HTMLElement>('[data-kind="role"]')!;
    expect(role.title).toBe("Ingestion.Ingestor");
    const clusterMention = container.querySelector<HTMLElement>('[data-kind="mention"]')!;
    expect(clusterMention.title).toContain("The little rabbit | The rabbit");
  });

  it("replaces previous content on re-render", () => {
    const container = document.createElement("div");
    renderView(container, computeView(makeDoc("first text")));
    renderView(container, computeView(makeDoc("second text")));
    expect(container.textContent).toBe("second text");
  });

  it("cycles the palette rather than failing on many clusters", () => {
    const words = Array.from({ length: 2 * (PALETTE.length + 1) }, (_, i) => `w${i}`);
    const text = words.join(" ");
    const mentions = words.map((w, i) => mention(`m${i}`, i, i + 1, w));
    const clusters = Array.from({ length: PALETTE.length + 1 }, (_, c) => ({
      id: `c${c}`,
      mention_ids: [`m${2 * c}`, `m${2 * c + 1}`],
    }));
    const view = computeView(makeDoc(text, { mentions, clusters }));
    expect(new Set(view.clusterColors.values()).size).toBe(PALETTE.length);
  });
});

describe("codePointIndex", () => {
  it("maps code points to UTF-16 units", () => {
    expect(codePointIndex("a🐇b")).toEqual([0, 1, 3, 4]);
  });
});
