// Top-down 2D world rendering. Everything is drawn from the latest view
// state only, so re-rendering the same state produces the same frame.
//
// World coordinates are meters, y increasing "up"; the canvas y axis points
// down, so the camera flips y. The camera follows the ego and rotates the
// world so the ego always points up the screen.

import type { ClientViewState } from "./view";
import { fadeOpacity, isStale, torCountdown } from "./view";

export const PIXELS_PER_METER = 4;

/** Structural subset of CanvasRenderingContext2D used here (testable). */
export interface Draw2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  globalAlpha: number;
  font: string;
  textAlign: CanvasTextAlign;
  save(): void;
  restore(): void;
  translate(x: number, y: number): void;
  rotate(rad: number): void;
  scale(x: number, y: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  rect(x: number, y: number, w: number, h: number): void;
  stroke(): void;
  fill(): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
}

function worldTransform(
  ctx: Draw2D,
  width: number,
  height: number,
  ego: { position: [number, number, number]; heading: number },
): void {
  ctx.translate(width / 2, height * 0.65);
  // Rotate so the ego heading points up the screen; canvas y-down flips
  // the rotation sense relative to world math.
  ctx.rotate(Math.PI / 2 + ego.heading);
  ctx.scale(PIXELS_PER_METER, -PIXELS_PER_METER);
  ctx.translate(-ego.position[0], -ego.position[1]);
}

function drawRoads(ctx: Draw2D, roads: [number, number][][]): void {
  ctx.strokeStyle = "#555a60";
  ctx.lineWidth = 7 / PIXELS_PER_METER;
  for (const road of roads) {
    if (road.length < 2) continue;
    ctx.beginPath();
    ctx.moveTo(road[0][0], road[0][1]);
    for (let i = 1; i < road.length; i++) {
      ctx.lineTo(road[i][0], road[i][1]);
    }
    ctx.stroke();
  }
}

function drawCar(
  ctx: Draw2D,
  x: number,
  y: number,
  heading: number,
  color: string,
): void {
  ctx.save();
  ctx.translate(x, y);
  ctx.rotate(heading);
  ctx.fillStyle = color;
  ctx.fillRect(-2.25, -0.9, 4.5, 1.8);
  ctx.restore();
}

function drawObjects(
  ctx: Draw2D,
  view: ClientViewState,
  highlighted: Set<string>,
): void {
  if (view.scene === null) return;
  for (const obj of view.scene.objects) {
    const [x, y] = obj.position;
    ctx.fillStyle = obj.tag === "CriticalObject" ? "#b4552d" : "#707a84";
    ctx.fillRect(x - 1.5, y - 1.5, 3, 3);
    if (highlighted.has(obj.id)) {
      ctx.strokeStyle = "#ff3b30";
      ctx.lineWidth = 3 / PIXELS_PER_METER;
      ctx.strokeRect(x - 2.5, y - 2.5, 5, 5);
    }
  }
}

function drawAgents(
  ctx: Draw2D,
  view: ClientViewState,
  highlighted: Set<string>,
): void {
  if (view.state === null) return;
  for (const agent of view.state.agents) {
    const [x, y] = agent.position;
    if (agent.kind === "AiCar") {
      drawCar(ctx, x, y, agent.heading, "#4a7fb5");
    } else {
      ctx.fillStyle = "#c9a227";
      ctx.beginPath();
      ctx.arc(x, y, 0.5, 0, 2 * Math.PI);
      ctx.fill();
    }
    if (highlighted.has(agent.id)) {
      ctx.strokeStyle = "#ff3b30";
      ctx.lineWidth = 3 / PIXELS_PER_METER;
      ctx.strokeRect(x - 3, y - 2, 6, 4);
    }
  }
}

function drawBanner(
  ctx: Draw2D,
  view: ClientViewState,
  now: number,
  width: number,
): void {
  const countdown = torCountdown(view, now);
  if (countdown === null || view.tor === null) return;
  ctx.fillStyle = "rgba(200, 30, 30, 0.92)";
  ctx.fillRect(width / 2 - 220, 24, 440, 64);
  ctx.fillStyle = "#ffffff";
  ctx.font = "bold 26px sans-serif";
  ctx.textAlign = "center";
  ctx.fillText("TAKE OVER", width / 2, 52);
  ctx.font = "18px sans-serif";
  ctx.fillText(`${countdown.toFixed(1)} s`, width / 2, 78);
}

function drawHud(
  ctx: Draw2D,
  view: ClientViewState,
  now: number,
  width: number,
  height: number,
): void {
  ctx.textAlign = "left";
  ctx.font = "14px sans-serif";
  ctx.fillStyle = "#d5d9de";
  if (view.state !== null) {
    const kmh = view.state.ego.speed * 3.6;
    ctx.fillText(`${kmh.toFixed(0)} km/h`, 16, height - 40);
    ctx.fillText(view.state.ego.mode, 16, height - 20);
  }
  if (view.lastSceneEnd !== null) {
    const end = view.lastSceneEnd;
    const times = end.zones
      .map((z) =>
        z.takeover_time === null ? `${z.zone_id}: —` : `${z.zone_id}: ${z.takeover_time.toFixed(2)} s`,
      )
      .join("   ");
    ctx.textAlign = "center";
    ctx.fillStyle = "#ffffff";
    ctx.font = "20px sans-serif";
    ctx.fillText(
      `scene "${end.scene}" finished — failures: ${end.failures}`,
      width / 2,
      height / 2 - 14,
    );
    ctx.font = "15px sans-serif";
    ctx.fillText(times, width / 2, height / 2 + 14);
  }
  if (isStale(view, now)) {
    ctx.textAlign = "center";
    ctx.fillStyle = "#ffcc00";
    ctx.font = "bold 18px sans-serif";
    ctx.fillText("connection stalled", width / 2, height - 24);
  }
  if (view.error !== null) {
    ctx.textAlign = "center";
    ctx.fillStyle = "#ff6b5e";
    ctx.font = "bold 18px sans-serif";
    ctx.fillText(view.error, width / 2, 120);
  }
}

/** Draw one complete frame of the current view onto a 2D context. */
export function renderFrame(
  ctx: Draw2D,
  view: ClientViewState,
  now: number,
  width: number,
  height: number,
): void {
  ctx.fillStyle = "#20262c";
  ctx.fillRect(0, 0, width, height);

  const highlighted = new Set(view.tor?.criticalObjects ?? []);
  if (view.state !== null && view.scene !== null) {
    ctx.save();
    worldTransform(ctx, width, height, view.state.ego);
    drawRoads(ctx, view.scene.roads);
    drawObjects(ctx, view, highlighted);
    drawAgents(ctx, view, highlighted);
    const [ex, ey] = view.state.ego.position;
    drawCar(ctx, ex, ey, view.state.ego.heading, "#e8e8e8");
    ctx.restore();
  }

  drawBanner(ctx, view, now, width);
  drawHud(ctx, view, now, width, height);

  const opacity = fadeOpacity(view, now);
  if (opacity > 0) {
    ctx.globalAlpha = opacity;
    ctx.fillStyle = "#000000";
    ctx.fillRect(0, 0, width, height);
    ctx.globalAlpha = 1;
  }
}
