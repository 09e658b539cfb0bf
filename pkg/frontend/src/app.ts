// DOM shell: owns the SVG canvas, toolbar, and detail panel, and funnels
// every interaction through the pure state transitions in state.ts.

import { ApiClient } from "./api.js";
import { computeLayout, Positions } from "./layout.js";
import { buildDocPanel, buildTopicPanel, TopicPanelModel } from "./panel.js";
import { buildScene, KIND_COLORS, Scene } from "./scene.js";
import {
  defaultWeightFloor,
  initialViewState,
  selectNode,
  setSearchQuery,
  setWeightFloor,
  toggleSubgraph,
} from "./state.js";
import { GraphPayload, Subgraph, ViewState } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 1200;
const HEIGHT = 800;
const LAYOUT_SEED = 1;

const SUBGRAPHS: { value: Subgraph; label: string }[] = [
  { value: "all", label: "All" },
  { value: "ww", label: "Word-Word" },
  { value: "dd", label: "Doc-Doc" },
  { value: "wd", label: "Word-Doc" },
];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class App {
  private state: ViewState = initialViewState();
  private graph: GraphPayload | null = null;
  private positions: Positions = new Map();
  private maxWeight = 0;

  private svg!: SVGSVGElement;
  private sceneGroup!: SVGGElement;
  private panel!: HTMLElement;
  private banner!: HTMLElement;
  private toolbar!: HTMLElement;
  private slider!: HTMLInputElement;
  private sliderValue!: HTMLElement;
  private search!: HTMLInputElement;
  private viewBox = { x: 0, y: 0, w: WIDTH, h: HEIGHT };

  constructor(private root: HTMLElement, private api: ApiClient) {}

  async start(): Promise<void> {
    this.buildChrome();
    await this.loadGraph();
  }

  private async loadGraph(): Promise<void> {
    this.banner.hidden = true;
    try {
      const graph = await this.api.fetchGraph();
      this.graph = graph;
      this.positions = computeLayout(graph, {
        width: WIDTH,
        height: HEIGHT,
        seed: LAYOUT_SEED,
      });
      this.maxWeight = graph.edges.reduce((m, e) => Math.max(m, e.weight), 0);
      this.state = setWeightFloor(this.state, defaultWeightFloor(graph));
      this.slider.max = String(Math.ceil(this.maxWeight));
      this.slider.value = String(this.state.weightFloor);
      this.render();
    } catch (err) {
      this.showError(`Could not load the topic web: ${(err as Error).message}`);
    }
  }

  private showError(message: string): void {
    this.banner.hidden = false;
    this.banner.textContent = "";
    this.banner.append(el("span", "", message + " "));
    const retry = el("button", "retry", "Retry");
    retry.addEventListener("click", () => void this.loadGraph());
    this.banner.append(retry);
  }

  private buildChrome(): void {
    this.root.textContent = "";
    this.banner = el("div", "banner");
    this.banner.hidden = true;
    this.toolbar = el("div", "toolbar");

    for (const { value, label } of SUBGRAPHS) {
      const button = el("button", "subgraph", label);
      button.dataset.subgraph = value;
      button.addEventListener("click", () => {
        this.state = toggleSubgraph(this.state, value);
        this.render();
      });
      this.toolbar.append(button);
    }

    const sliderWrap = el("label", "slider-wrap", "Min weight ");
    this.slider = el("input") as HTMLInputElement;
    this.slider.type = "range";
    this.slider.min = "0";
    this.slider.step = "0.1";
    this.slider.addEventListener("input", () => {
      this.state = setWeightFloor(this.state, Number(this.slider.value));
      this.render();
    });
    this.sliderValue = el("span", "slider-value", "0");
    sliderWrap.append(this.slider, this.sliderValue);
    this.toolbar.append(sliderWrap);

    this.search = el("input", "search") as HTMLInputElement;
    this.search.type = "search";
    this.search.placeholder = "highlight topics by keyword";
    this.search.addEventListener("input", () => {
      this.state = setSearchQuery(this.state, this.search.value);
      this.render();
    });
    this.toolbar.append(this.search);

    const stage = el("div", "stage");
    this.svg = document.createElementNS(SVG_NS, "svg");
    this.svg.setAttribute("class", "canvas");
    this.applyViewBox();
    this.sceneGroup = document.createElementNS(SVG_NS, "g");
    this.svg.append(this.sceneGroup);
    this.installPanZoom();

    this.panel = el("aside", "panel");
    this.panel.append(el("p", "hint", "Click a topic to inspect it."));
    stage.append(this.svg, this.panel);
    this.root.append(this.banner, this.toolbar, stage);
  }

  private applyViewBox(): void {
    const { x, y, w, h } = this.viewBox;
    this.svg.setAttribute("viewBox", `${x} ${y} ${w} ${h}`);
  }

  private installPanZoom(): void {
    let dragging = false;
    let last = { x: 0, y: 0 };
    this.svg.addEventListener("mousedown", (ev) => {
      if (ev.target === this.svg || ev.target === this.sceneGroup) {
        dragging = true;
        last = { x: ev.clientX, y: ev.clientY };
      }
    });
    window.addEventListener("mousemove", (ev) => {
      if (!dragging) return;
      const scale = this.viewBox.w / this.svg.clientWidth;
      this.viewBox.x -= (ev.clientX - last.x) * scale;
      this.viewBox.y -= (ev.clientY - last.y) * scale;
      last = { x: ev.clientX, y: ev.clientY };
      this.applyViewBox();
    });
    window.addEventListener("mouseup", () => {
      dragging = false;
    });
    this.svg.addEventListener("wheel", (ev) => {
      ev.preventDefault();
      const factor = ev.deltaY > 0 ? 1.1 : 0.9;
      const w = this.viewBox.w * factor;
      const h = this.viewBox.h * factor;
      this.viewBox.x += (this.viewBox.w - w) / 2;
      this.viewBox.y += (this.viewBox.h - h) / 2;
      this.viewBox.w = w;
      this.viewBox.h = h;
      this.applyViewBox();
    });
  }

  private render(): void {
    if (!this.graph) return;
    const scene = buildScene(this.graph, this.positions, this.state);
    this.drawScene(scene);
    for (const button of this.toolbar.querySelectorAll<HTMLButtonElement>("button.subgraph")) {
      button.classList.toggle("active", button.dataset.subgraph === this.state.activeSubgraph);
    }
    this.sliderValue.textContent = this.slider.value;
  }

  private drawScene(scene: Scene): void {
    this.sceneGroup.textContent = "";
    for (const edge of scene.edges) {
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(edge.x1));
      line.setAttribute("y1", String(edge.y1));
      line.setAttribute("x2", String(edge.x2));
      line.setAttribute("y2", String(edge.y2));
      line.setAttribute("stroke-width", String(edge.strokeWidth));
      line.setAttribute("class", `edge edge-${edge.kind}`);
      line.dataset.key = edge.key;
      const title = document.createElementNS(SVG_NS, "title");
      title.textContent = `${edge.src} - ${edge.dst}: weight ${edge.weightLabel}`;
      line.append(title);
      this.sceneGroup.append(line);
    }
    for (const node of scene.nodes) {
      const group = document.createElementNS(SVG_NS, "g");
      group.setAttribute("class",
        "node" + (node.selected ? " selected" : "") + (node.highlighted ? " hit" : ""));
      group.dataset.id = node.id;
      const circle = document.createElementNS(SVG_NS, "circle");
      circle.setAttribute("cx", String(node.x));
      circle.setAttribute("cy", String(node.y));
      circle.setAttribute("r", String(node.radius));
      circle.setAttribute("fill", node.color);
      const title = document.createElementNS(SVG_NS, "title");
      title.textContent = `${node.id}: dominance ${node.dominanceLabel}`;
      circle.append(title);
      const label = document.createElementNS(SVG_NS, "text");
      label.setAttribute("x", String(node.x));
      label.setAttribute("y", String(node.y - node.radius - 4));
      label.textContent = node.label;
      group.append(circle, label);
      group.addEventListener("click", () => void this.select(node.id));
      this.sceneGroup.append(group);
    }
  }

  private async select(nodeId: string): Promise<void> {
    if (!this.graph) return;
    this.state = selectNode(this.state, this.graph, nodeId);
    this.render();
    try {
      const detail = await this.api.fetchTopic(nodeId);
      this.renderTopicPanel(buildTopicPanel(detail));
    } catch (err) {
      if ((err as Error).name !== "AbortError") {
        this.panel.textContent = "";
        this.panel.append(el("p", "hint", `Topic not found (${(err as Error).message}).`));
      }
    }
  }

  private renderTopicPanel(model: TopicPanelModel): void {
    this.panel.textContent = "";
    const head = el("h2", "", model.heading);
    head.style.color = KIND_COLORS[model.kind];
    this.panel.append(head);
    this.panel.append(el("p", "meta", `dominance ${model.dominanceLabel}`));

    this.panel.append(el("h3", "", model.wordListTitle));
    const words = el("ul", "words");
    for (const word of model.words) words.append(el("li", "", word));
    this.panel.append(words);

    if (model.kind === "doc") {
      this.panel.append(el("h3", "", "Representative documents"));
      const docs = el("ol", "docs");
      for (const row of model.docs) {
        const item = el("li");
        const link = el("button", "doclink", row.title || row.docId);
        link.title = row.docId;
        link.addEventListener("click", () => void this.showDoc(row.docId));
        item.append(link, el("span", "meta", ` ${row.weightLabel}`));
        docs.append(item);
      }
      this.panel.append(docs);
    }

    this.panel.append(el("h3", "", "Relations by strength"));
    const edges = el("ul", "edges");
    for (const row of model.edges) {
      const item = el("li");
      const jump = el("button", "edgelink", `${row.otherId}`);
      jump.addEventListener("click", () => void this.select(row.otherId));
      item.append(jump, el("span", "meta", ` ${row.kind} · ${row.weightLabel}`));
      edges.append(item);
    }
    this.panel.append(edges);
  }

  private async showDoc(docId: string): Promise<void> {
    try {
      const model = buildDocPanel(await this.api.fetchDoc(docId));
      const section = el("div", "docview");
      section.append(el("h3", "", `Document ${model.id}`));
      section.append(el("p", "snippet", model.snippet || "(no text)"));
      const bars = el("ul", "mixture");
      for (const part of model.mixture) {
        const item = el("li");
        const bar = el("span", "bar");
        bar.style.width = `${Math.round(part.share * 120)}px`;
        item.append(el("span", "meta", `${part.topic} ${part.shareLabel} `), bar);
        bars.append(item);
      }
      section.append(bars);
      this.panel.querySelector(".docview")?.remove();
      this.panel.append(section);
    } catch (err) {
      if ((err as Error).name !== "AbortError") {
        this.panel.querySelector(".docview")?.remove();
        this.panel.append(el("p", "hint docview",
          `Document detail unavailable (${(err as Error).message}).`));
      }
    }
  }
}
