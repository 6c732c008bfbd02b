// Client view state: a pure reducer over server messages plus a few
// time-derived readouts (takeover countdown, fade opacity, staleness).
// Rendering only ever reads this structure — no prediction, no smoothing.

import type {
  SceneEndMessage,
  SceneMessage,
  ServerMessage,
  StateMessage,
} from "./protocol";
import { PROTOCOL_VERSION } from "./protocol";

export const FADE_RAMP_MS = 200;
export const STALE_AFTER_MS = 500;

export interface TorOverlay {
  zoneId: string;
  budget: number;
  criticalObjects: string[];
  /** Client clock (ms) when the tor message arrived. */
  receivedAt: number;
}

export interface ClientViewState {
  connected: boolean;
  role: "driver" | "observer" | null;
  scenario: string | null;
  sceneNames: string[];
  scene: SceneMessage | null;
  state: StateMessage | null;
  stateReceivedAt: number;
  tor: TorOverlay | null;
  fadeOn: boolean;
  fadeChangedAt: number;
  lastSceneEnd: SceneEndMessage | null;
  error: string | null;
}

export function initialView(): ClientViewState {
  return {
    connected: false,
    role: null,
    scenario: null,
    sceneNames: [],
    scene: null,
    state: null,
    stateReceivedAt: 0,
    tor: null,
    fadeOn: false,
    fadeChangedAt: 0,
    lastSceneEnd: null,
    error: null,
  };
}

/** Fold one server message into the view. Pure: returns a new state. */
export function applyMessage(
  view: ClientViewState,
  msg: ServerMessage,
  now: number,
): ClientViewState {
  switch (msg.type) {
    case "hello":
      if (msg.version !== PROTOCOL_VERSION) {
        return {
          ...view,
          error: `server speaks ${msg.version}, this client speaks ${PROTOCOL_VERSION}`,
        };
      }
      return {
        ...view,
        connected: true,
        role: msg.role,
        scenario: msg.scenario,
        sceneNames: msg.scenes,
        error: null,
      };
    case "scene":
      // New scene: previous overlays no longer apply.
      return { ...view, scene: msg, state: null, tor: null, lastSceneEnd: null };
    case "state": {
      let tor = view.tor;
      if (msg.tor === null) {
        tor = null;
      }
      return { ...view, state: msg, stateReceivedAt: now, tor };
    }
    case "tor":
      return {
        ...view,
        tor: {
          zoneId: msg.zone_id,
          budget: msg.budget,
          criticalObjects: msg.critical_objects,
          receivedAt: now,
        },
      };
    case "fade":
      if (msg.on === view.fadeOn) {
        return view;
      }
      return {
        ...view,
        fadeOn: msg.on,
        fadeChangedAt: now,
        tor: msg.on ? null : view.tor,
      };
    case "scene_end":
      return { ...view, lastSceneEnd: msg };
    case "error":
      return { ...view, error: `${msg.code}: ${msg.text}` };
  }
}

export function markDisconnected(view: ClientViewState): ClientViewState {
  return { ...view, connected: false };
}

/** Seconds left on the takeover budget; null when no TOR is active. */
export function torCountdown(view: ClientViewState, now: number): number | null {
  if (view.tor === null) {
    return null;
  }
  const elapsed = (now - view.tor.receivedAt) / 1000;
  return Math.max(0, view.tor.budget - elapsed);
}

/** Black-overlay opacity in [0, 1], ramping over FADE_RAMP_MS. */
export function fadeOpacity(view: ClientViewState, now: number): number {
  const t = Math.min(1, Math.max(0, (now - view.fadeChangedAt) / FADE_RAMP_MS));
  return view.fadeOn ? t : 1 - t;
}

/** True when no state has arrived for STALE_AFTER_MS while connected. */
export function isStale(view: ClientViewState, now: number): boolean {
  return (
    view.connected &&
    view.state !== null &&
    now - view.stateReceivedAt > STALE_AFTER_MS
  );
}

export function egoMode(view: ClientViewState): "Automated" | "Manual" | null {
  return view.state === null ? null : view.state.ego.mode;
}
