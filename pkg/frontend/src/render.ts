// DOM rendering: attack graph as SVG (hexagonal attacker root, oval
// vulnerability nodes), probability bars, round feedback, and the finish
// screen. Pure functions of state; no server calls here.

import type { GraphView, RoundResult } from "./api.js";
import type { ClientSessionState } from "./state.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export type NodePosition = { x: number; y: number };

// Simple layered layout: root on top, vulnerability nodes spread below.
export function layoutGraph(
  graph: GraphView,
  width = 640,
  height = 360,
): Map<number, NodePosition> {
  const positions = new Map<number, NodePosition>();
  positions.set(graph.attacker_root, { x: width / 2, y: 40 });
  const n = graph.nodes.length;
  graph.nodes.forEach((node, i) => {
    const x = ((i + 1) * width) / (n + 1);
    const y = 140 + (i % 2) * 120;
    positions.set(node, { x, y });
  });
  return positions;
}

function hexagonPoints(cx: number, cy: number, r: number): string {
  const points: string[] = [];
  for (let i = 0; i < 6; i++) {
    const angle = (Math.PI / 3) * i - Math.PI / 6;
    points.push(`${cx + r * Math.cos(angle)},${cy + r * Math.sin(angle)}`);
  }
  return points.join(" ");
}

export function renderGraph(
  container: HTMLElement,
  graph: GraphView,
  potentialRewards: number[],
  onPick: (node: number) => void,
): void {
  container.textContent = "";
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", "0 0 640 360");
  svg.setAttribute("class", "graph");
  const positions = layoutGraph(graph);

  for (const [parent, child] of graph.edges) {
    const from = positions.get(parent);
    const to = positions.get(child);
    if (!from || !to) continue;
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(from.x));
    line.setAttribute("y1", String(from.y));
    line.setAttribute("x2", String(to.x));
    line.setAttribute("y2", String(to.y));
    line.setAttribute("class", "edge");
    svg.appendChild(line);
  }

  const root = positions.get(graph.attacker_root)!;
  const hex = document.createElementNS(SVG_NS, "polygon");
  hex.setAttribute("points", hexagonPoints(root.x, root.y, 28));
  hex.setAttribute("class", "attacker-root");
  hex.setAttribute("data-node", String(graph.attacker_root));
  svg.appendChild(hex);
  const rootLabel = document.createElementNS(SVG_NS, "text");
  rootLabel.setAttribute("x", String(root.x));
  rootLabel.setAttribute("y", String(root.y + 5));
  rootLabel.setAttribute("class", "node-label");
  rootLabel.textContent = "APT";
  svg.appendChild(rootLabel);

  for (const node of graph.nodes) {
    const pos = positions.get(node)!;
    const group = document.createElementNS(SVG_NS, "g");
    group.setAttribute("class", "vulnerability");
    group.setAttribute("data-node", String(node));
    const oval = document.createElementNS(SVG_NS, "ellipse");
    oval.setAttribute("cx", String(pos.x));
    oval.setAttribute("cy", String(pos.y));
    oval.setAttribute("rx", "36");
    oval.setAttribute("ry", "24");
    group.appendChild(oval);
    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(pos.x));
    label.setAttribute("y", String(pos.y));
    label.setAttribute("class", "node-label");
    label.textContent = `V${node + 1}`;
    group.appendChild(label);
    const reward = document.createElementNS(SVG_NS, "text");
    reward.setAttribute("x", String(pos.x));
    reward.setAttribute("y", String(pos.y + 16));
    reward.setAttribute("class", "reward-label");
    reward.textContent = `+${potentialRewards[node].toFixed(1)}`;
    group.appendChild(reward);
    group.addEventListener("click", () => onPick(node));
    svg.appendChild(group);
  }
  container.appendChild(svg);
}

export function renderProbabilityBars(
  container: HTMLElement,
  probabilities: number[] | null,
): void {
  container.textContent = "";
  if (probabilities === null) {
    container.hidden = true;
    return;
  }
  container.hidden = false;
  const heading = document.createElement("h3");
  heading.textContent = "Estimated attack probabilities";
  container.appendChild(heading);
  probabilities.forEach((p, node) => {
    const row = document.createElement("div");
    row.className = "prob-row";
    row.dataset.node = String(node);
    const label = document.createElement("span");
    label.textContent = `V${node + 1}`;
    const bar = document.createElement("div");
    bar.className = "prob-bar";
    bar.style.width = `${(p * 100).toFixed(1)}%`;
    const value = document.createElement("span");
    value.className = "prob-value";
    value.textContent = `${(p * 100).toFixed(1)}%`;
    row.append(label, bar, value);
    container.appendChild(row);
  });
}

export function renderRoundStatus(
  container: HTMLElement,
  state: ClientSessionState,
): void {
  const display = Math.min(state.round + 1, state.roundsTotal);
  container.textContent = `Round ${display}/${state.roundsTotal} — score ${
    state.cumulativeScore.toFixed(1)
  }`;
}

export function renderFeedback(
  container: HTMLElement,
  result: RoundResult | null,
): void {
  container.textContent = "";
  if (!result) return;
  const blocked = result.delta.every((d) => d === 1);
  const line = document.createElement("p");
  line.className = blocked ? "feedback-blocked" : "feedback-missed";
  line.textContent = blocked
    ? `Blocked the attack on V${result.attacked_node + 1}! ` +
      `Reward ${result.r_D.toFixed(1)}.`
    : `Attack landed on V${result.attacked_node + 1}. ` +
      `Reward ${result.r_D.toFixed(1)}.`;
  container.appendChild(line);
  const protection = document.createElement("p");
  protection.textContent = `Data protected this round: ${
    (result.protection * 100).toFixed(1)
  }%`;
  container.appendChild(protection);
}

export function renderFinish(
  container: HTMLElement,
  score: number,
  code: string,
  onCopy: (code: string) => void,
): void {
  container.textContent = "";
  const heading = document.createElement("h2");
  heading.textContent = "Session complete";
  const scoreLine = document.createElement("p");
  scoreLine.className = "final-score";
  scoreLine.textContent = `Final score: ${score.toFixed(1)}`;
  const codeLine = document.createElement("p");
  codeLine.className = "confirmation-code";
  codeLine.textContent = code;
  const copy = document.createElement("button");
  copy.textContent = "Copy confirmation code";
  copy.addEventListener("click", () => onCopy(code));
  container.append(heading, scoreLine, codeLine, copy);
}
