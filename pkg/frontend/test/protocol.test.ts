import { describe, expect, it } from "vitest";

import {
  PROTOCOL_VERSION,
  helloFrame,
  inputFrame,
  parseMessage,
} from "../src/protocol";

describe("parseMessage", () => {
  it("parses a known message type", () => {
    const msg = parseMessage('{"type": "fade", "on": true}');
    expect(msg).toEqual({ type: "fade", on: true });
  });

  it("returns null for unknown types", () => {
    expect(parseMessage('{"type": "telemetry", "x": 1}')).toBeNull();
  });

  it("returns null for malformed JSON", () => {
    expect(parseMessage("{nope")).toBeNull();
  });

  it("returns null for non-object frames", () => {
    expect(parseMessage("42")).toBeNull();
    expect(parseMessage("null")).toBeNull();
    expect(parseMessage('"state"')).toBeNull();
  });
});

describe("frames", () => {
  it("helloFrame announces the protocol version and role", () => {
    const obj = JSON.parse(helloFrame("observer"));
    expect(obj).toEqual({
      type: "hello",
      version: PROTOCOL_VERSION,
      role: "observer",
    });
  });

  it("inputFrame tags the payload as input", () => {
    const obj = JSON.parse(
      inputFrame({ throttle: 0.5, brake: 0, steering: -0.25, tick: 90 }),
    );
    expect(obj).toEqual({
      type: "input",
      throttle: 0.5,
      brake: 0,
      steering: -0.25,
      tick: 90,
    });
  });
});
