import { describe, expect, it } from "vitest";

import {
  DEADZONE,
  KeyboardState,
  gamepadAxes,
  mergeAxes,
  shapeAxes,
  shapeAxis,
  shouldEmitInput,
} from "../src/input";
import type { StateMessage } from "../src/protocol";
import { applyMessage, initialView } from "../src/view";

describe("shapeAxis", () => {
  it("zeroes values inside the deadzone", () => {
    expect(shapeAxis(0.05, false)).toBe(0);
    expect(shapeAxis(-0.04, true)).toBe(0);
  });

  it("rescales the live range to full range", () => {
    // (0.5 - 0.05) / 0.95
    expect(shapeAxis(0.5, false)).toBeCloseTo(0.47368, 5);
    expect(shapeAxis(1.0, false)).toBe(1);
  });

  it("preserves sign on signed axes and clamps", () => {
    expect(shapeAxis(-0.5, true)).toBeCloseTo(-0.47368, 5);
    expect(shapeAxis(-3, true)).toBe(-1);
    expect(shapeAxis(-3, false)).toBe(0);
    expect(shapeAxis(2, false)).toBe(1);
  });

  it("shapeAxes applies the curve per channel", () => {
    const out = shapeAxes({ throttle: 0.5, brake: 0.02, steering: -0.5 });
    expect(out.throttle).toBeCloseTo(0.47368, 5);
    expect(out.brake).toBe(0);
    expect(out.steering).toBeCloseTo(-0.47368, 5);
  });
});

describe("KeyboardState", () => {
  it("is all zero with nothing held", () => {
    expect(new KeyboardState().axes()).toEqual({
      throttle: 0,
      brake: 0,
      steering: 0,
    });
  });

  it("maps arrows to pedals and steering", () => {
    const kb = new KeyboardState();
    kb.press("ArrowUp");
    kb.press("ArrowRight");
    expect(kb.axes()).toEqual({ throttle: 1, brake: 0, steering: 1 });
    kb.release("ArrowRight");
    kb.press("ArrowLeft");
    kb.press("ArrowDown");
    expect(kb.axes()).toEqual({ throttle: 1, brake: 1, steering: -1 });
  });

  it("opposing arrows cancel", () => {
    const kb = new KeyboardState();
    kb.press("ArrowLeft");
    kb.press("ArrowRight");
    expect(kb.axes().steering).toBe(0);
  });
});

describe("gamepadAxes", () => {
  it("reads standard-mapping triggers and stick", () => {
    const pad = {
      axes: [-0.3, 0],
      buttons: Array.from({ length: 8 }, (_, i) => ({
        value: i === 7 ? 0.8 : i === 6 ? 0.1 : 0,
      })),
    };
    expect(gamepadAxes(pad)).toEqual({
      throttle: 0.8,
      brake: 0.1,
      steering: -0.3,
    });
  });

  it("tolerates missing buttons", () => {
    expect(gamepadAxes({ axes: [], buttons: [] })).toEqual({
      throttle: 0,
      brake: 0,
      steering: 0,
    });
  });
});

describe("mergeAxes", () => {
  const keys = { throttle: 1, brake: 0, steering: 0 };

  it("keyboard passes through without a gamepad", () => {
    expect(mergeAxes(keys, null)).toEqual(keys);
  });

  it("an active gamepad wins over the keyboard", () => {
    const pad = { throttle: 0.9, brake: 0, steering: 0 };
    expect(mergeAxes(keys, pad)).toEqual(pad);
  });

  it("an idle gamepad defers to the keyboard", () => {
    const idle = { throttle: DEADZONE, brake: 0, steering: DEADZONE };
    expect(mergeAxes(keys, idle)).toEqual(keys);
  });
});

describe("shouldEmitInput", () => {
  function viewWith(role: "driver" | "observer", mode: "Automated" | "Manual") {
    let view = applyMessage(
      initialView(),
      {
        type: "hello",
        version: "torloop/1",
        role,
        scenario: "demo",
        scenes: ["main"],
      },
      0,
    );
    const state: StateMessage = {
      type: "state",
      tick: 1,
      ego: { id: "ego", position: [0, 0, 0], heading: 0, speed: 0, mode },
      agents: [],
      tor: null,
      fade: false,
    };
    view = applyMessage(view, state, 10);
    return view;
  }

  it("only the driver in Manual mode emits", () => {
    expect(shouldEmitInput(viewWith("driver", "Manual"))).toBe(true);
    expect(shouldEmitInput(viewWith("driver", "Automated"))).toBe(false);
    expect(shouldEmitInput(viewWith("observer", "Manual"))).toBe(false);
    expect(shouldEmitInput(initialView())).toBe(false);
  });
});
