import { describe, expect, it } from "vitest";

import { computeLayout } from "../src/layout.js";
import {
  buildScene,
  edgeMatchesSubgraph,
  edgeStrokeWidth,
  nodeRadius,
  sceneSnapshot,
} from "../src/scene.js";
import {
  initialViewState,
  selectNode,
  setSearchQuery,
  setWeightFloor,
  toggleSubgraph,
} from "../src/state.js";
import { GraphPayload, ViewState } from "../src/types.js";
import { graphFixture } from "./fixtures.js";

const LAYOUT = { width: 1200, height: 800, seed: 1 };

function scene(graph: GraphPayload, state: ViewState) {
  return buildScene(graph, computeLayout(graph, LAYOUT), state);
}

describe("node sizing", () => {
  it("larger dominance gives a strictly larger radius", () => {
    expect(nodeRadius(0.04, 0.04)).toBeGreaterThan(nodeRadius(0.01, 0.04));
  });

  it("scene radii follow payload dominance ordering", () => {
    const graph = graphFixture();
    const s = scene(graph, initialViewState());
    const radius = new Map(s.nodes.map((n) => [n.id, n.radius]));
    for (const a of graph.nodes) {
      for (const b of graph.nodes) {
        if (a.dominance > b.dominance) {
          expect(radius.get(a.id)!).toBeGreaterThan(radius.get(b.id)!);
        }
      }
    }
  });

  it("node color is keyed by topic kind", () => {
    const s = scene(graphFixture(), initialViewState());
    const colors = new Map(s.nodes.map((n) => [n.kind, n.color]));
    expect(colors.get("word")).not.toBe(colors.get("doc"));
    for (const node of s.nodes) {
      expect(node.color).toBe(colors.get(node.kind));
    }
  });
});

describe("edge rendering", () => {
  it("weight 15 is strictly thicker than weight 3", () => {
    expect(edgeStrokeWidth(15, 15)).toBeGreaterThan(edgeStrokeWidth(3, 15));
  });

  it("edges below the weight floor are hidden", () => {
    const graph = graphFixture();
    const weights = graph.edges.map((e) => e.weight).sort((a, b) => a - b);
    const floor = weights[Math.floor(weights.length / 2)];
    const s = scene(graph, setWeightFloor(initialViewState(), floor));
    const visible = new Set(s.edges.map((e) => e.key));
    for (const edge of graph.edges) {
      const key = `${edge.kind}:${edge.src}:${edge.dst}`;
      expect(visible.has(key)).toBe(edge.weight >= floor);
    }
  });

  it("floor at the maximum weight leaves at most the single heaviest edge", () => {
    const graph = graphFixture();
    const max = Math.max(...graph.edges.map((e) => e.weight));
    const s = scene(graph, setWeightFloor(initialViewState(), max));
    expect(s.edges.length).toBeLessThanOrEqual(1);
    if (s.edges.length === 1) {
      expect(Number(s.edges[0].weightLabel)).toBeCloseTo(Number(max.toPrecision(3)));
    }
  });
});

describe("subgraph filtering", () => {
  it("matches exactly the active kind", () => {
    expect(edgeMatchesSubgraph("ww", "all")).toBe(true);
    expect(edgeMatchesSubgraph("dd", "ww")).toBe(false);
    expect(edgeMatchesSubgraph("wd", "wd")).toBe(true);
  });

  it("word-word view contains zero dd/wd edges", () => {
    const s = scene(graphFixture(), toggleSubgraph(initialViewState(), "ww"));
    expect(s.edges.length).toBeGreaterThan(0);
    expect(s.edges.every((e) => e.kind === "ww")).toBe(true);
  });

  it("each filter hides exactly the non-matching kinds", () => {
    const graph = graphFixture();
    for (const kind of ["ww", "dd", "wd"] as const) {
      const s = scene(graph, toggleSubgraph(initialViewState(), kind));
      const expected = graph.edges.filter((e) => e.kind === kind).length;
      expect(s.edges.length).toBe(expected);
    }
  });

  it("all -> dd -> all round trip restores the original edge set", () => {
    const graph = graphFixture();
    const start = initialViewState();
    const after = toggleSubgraph(toggleSubgraph(start, "dd"), "all");
    expect(sceneSnapshot(scene(graph, after))).toBe(sceneSnapshot(scene(graph, start)));
  });

  it("toggling preserves the selection", () => {
    const graph = graphFixture();
    const selected = selectNode(initialViewState(), graph, "w1");
    const toggled = toggleSubgraph(selected, "dd");
    expect(toggled.selectedNode).toBe("w1");
    const s = scene(graph, toggled);
    expect(s.nodes.find((n) => n.id === "w1")!.selected).toBe(true);
  });
});

describe("search highlighting", () => {
  it("highlights nodes whose keywords contain the term", () => {
    const graph = graphFixture();
    const term = graph.nodes[0].keywords[0];
    const s = scene(graph, setSearchQuery(initialViewState(), term));
    const hit = s.nodes.find((n) => n.id === graph.nodes[0].id)!;
    expect(hit.highlighted).toBe(true);
    const misses = s.nodes.filter(
      (n) => !graph.nodes.find((g) => g.id === n.id)!.keywords
        .some((k) => k.includes(term)),
    );
    for (const node of misses) expect(node.highlighted).toBe(false);
  });

  it("empty query highlights nothing", () => {
    const s = scene(graphFixture(), initialViewState());
    expect(s.nodes.every((n) => !n.highlighted)).toBe(true);
  });
});

describe("determinism", () => {
  it("replaying a scripted state sequence reproduces identical snapshots", () => {
    const graph = graphFixture();
    const script = (state: ViewState): ViewState[] => {
      const steps: ViewState[] = [state];
      state = toggleSubgraph(state, "ww");
      steps.push(state);
      state = selectNode(state, graph, "d0");
      steps.push(state);
      state = setWeightFloor(state, 1.2);
      steps.push(state);
      state = toggleSubgraph(state, "all");
      steps.push(state);
      state = setSearchQuery(state, graph.nodes[2].keywords[1] ?? "x");
      steps.push(state);
      return steps;
    };
    const run = () =>
      script(initialViewState()).map((state) => sceneSnapshot(scene(graph, state)));
    const first = run();
    const second = run();
    expect(second).toEqual(first);
  });

  it("displayed numbers are the payload values at 3 significant digits", () => {
    const graph = graphFixture();
    const s = scene(graph, initialViewState());
    const byId = new Map(graph.nodes.map((n) => [n.id, n]));
    for (const node of s.nodes) {
      expect(node.dominanceLabel)
        .toBe(String(Number(byId.get(node.id)!.dominance.toPrecision(3))));
    }
    const edgeByKey = new Map(
      graph.edges.map((e) => [`${e.kind}:${e.src}:${e.dst}`, e]),
    );
    for (const edge of s.edges) {
      expect(edge.weightLabel)
        .toBe(String(Number(edgeByKey.get(edge.key)!.weight.toPrecision(3))));
    }
  });
});
