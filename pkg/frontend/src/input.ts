// Driver input capture: keyboard arrows and standard-gamepad axes, mapped
// through the same deadzone curve the server applies, with a display-side
// guard so the client stays silent while automation is driving.

import type { ClientViewState } from "./view";
import { egoMode } from "./view";

export const DEADZONE = 0.05;

export interface Axes {
  throttle: number;
  brake: number;
  steering: number;
}

export const ZERO_AXES: Axes = { throttle: 0, brake: 0, steering: 0 };

/**
 * Deadzone curve shared with the server's input bridge: values inside the
 * deadzone read as zero, the live range outside is rescaled to full range.
 */
export function shapeAxis(value: number, signed: boolean, deadzone = DEADZONE): number {
  const v = signed
    ? Math.max(-1, Math.min(1, value))
    : Math.max(0, Math.min(1, value));
  const mag = Math.abs(v);
  if (mag <= deadzone) {
    return 0;
  }
  const out = (mag - deadzone) / (1 - deadzone);
  return v >= 0 ? out : -out;
}

export function shapeAxes(raw: Axes, deadzone = DEADZONE): Axes {
  return {
    throttle: shapeAxis(raw.throttle, false, deadzone),
    brake: shapeAxis(raw.brake, false, deadzone),
    steering: shapeAxis(raw.steering, true, deadzone),
  };
}

/** Arrow keys as a binary fallback: up/down pedals, left/right steering. */
export class KeyboardState {
  private held = new Set<string>();

  press(key: string): void {
    this.held.add(key);
  }

  release(key: string): void {
    this.held.delete(key);
  }

  axes(): Axes {
    const left = this.held.has("ArrowLeft") ? 1 : 0;
    const right = this.held.has("ArrowRight") ? 1 : 0;
    return {
      throttle: this.held.has("ArrowUp") ? 1 : 0,
      brake: this.held.has("ArrowDown") ? 1 : 0,
      // Canvas renders y-down, so +steering is a visual right turn.
      steering: right - left,
    };
  }
}

/** Structural subset of the Gamepad API, for testability. */
export interface GamepadLike {
  axes: ReadonlyArray<number>;
  buttons: ReadonlyArray<{ value: number }>;
}

/** Standard-mapping gamepad: axis 0 steers, triggers 6/7 brake/throttle. */
export function gamepadAxes(pad: GamepadLike): Axes {
  return {
    throttle: pad.buttons[7]?.value ?? 0,
    brake: pad.buttons[6]?.value ?? 0,
    steering: pad.axes[0] ?? 0,
  };
}

/** Keyboard wins over an idle gamepad; an active gamepad wins over idle keys. */
export function mergeAxes(keyboard: Axes, gamepad: Axes | null): Axes {
  if (gamepad === null) {
    return keyboard;
  }
  const gamepadActive =
    Math.abs(gamepad.steering) > DEADZONE ||
    gamepad.throttle > DEADZONE ||
    gamepad.brake > DEADZONE;
  return gamepadActive ? gamepad : keyboard;
}

/**
 * Inputs go on the wire only from the driver, and only while the latest
 * state shows manual control. The server is authoritative either way; this
 * guard just keeps the client honest.
 */
export function shouldEmitInput(view: ClientViewState): boolean {
  return view.role === "driver" && egoMode(view) === "Manual";
}
