// Wire protocol "torloop/1": one JSON object per WebSocket text frame.
// These types mirror the server's message union verbatim.

export const PROTOCOL_VERSION = "torloop/1";

export interface HelloMessage {
  type: "hello";
  version: string;
  role: "driver" | "observer";
  scenario: string;
  scenes: string[];
}

export interface SceneMessage {
  type: "scene";
  name: string;
  /** Road centerlines sampled every 5 m, as [x, y] pairs in meters. */
  roads: [number, number][][];
  objects: { id: string; tag: string; position: [number, number, number] }[];
}

export interface EgoState {
  id: string;
  position: [number, number, number];
  heading: number;
  speed: number;
  mode: "Automated" | "Manual";
}

export interface AgentState {
  id: string;
  kind: "AiCar" | "Pedestrian";
  position: [number, number, number];
  heading: number;
  speed: number;
}

export interface ActiveTor {
  zone_id: string;
  budget: number;
  critical_objects: string[];
  issued_tick: number;
}

export interface StateMessage {
  type: "state";
  tick: number;
  ego: EgoState;
  agents: AgentState[];
  tor: ActiveTor | null;
  fade: boolean;
}

export interface TorMessage {
  type: "tor";
  zone_id: string;
  budget: number;
  critical_objects: string[];
}

export interface FadeMessage {
  type: "fade";
  on: boolean;
}

export interface SceneEndMessage {
  type: "scene_end";
  scene: string;
  failures: number;
  zones: {
    zone_id: string;
    phase: string;
    takeover_time: number | null;
    critical: boolean;
  }[];
}

export interface ErrorMessage {
  type: "error";
  code: string;
  text: string;
}

export type ServerMessage =
  | HelloMessage
  | SceneMessage
  | StateMessage
  | TorMessage
  | FadeMessage
  | SceneEndMessage
  | ErrorMessage;

export interface InputMessage {
  type: "input";
  throttle: number;
  brake: number;
  steering: number;
  tick: number;
}

const KNOWN_TYPES = new Set([
  "hello",
  "scene",
  "state",
  "tor",
  "fade",
  "scene_end",
  "error",
]);

/** Parse one frame; returns null for anything that is not a known message. */
export function parseMessage(raw: string): ServerMessage | null {
  let obj: unknown;
  try {
    obj = JSON.parse(raw);
  } catch {
    return null;
  }
  if (
    typeof obj !== "object" ||
    obj === null ||
    !KNOWN_TYPES.has((obj as { type?: unknown }).type as string)
  ) {
    return null;
  }
  return obj as ServerMessage;
}

export function helloFrame(role: "driver" | "observer"): string {
  return JSON.stringify({ type: "hello", version: PROTOCOL_VERSION, role });
}

export function inputFrame(msg: Omit<InputMessage, "type">): string {
  return JSON.stringify({ type: "input", ...msg });
}
