// Browser entry point: wires the session, the input devices, and the
// render loop together. Endpoint and role come from the query string:
//   index.html?endpoint=ws://127.0.0.1:8700&role=driver

import { KeyboardState, gamepadAxes, mergeAxes } from "./input";
import { renderFrame } from "./render";
import { Session } from "./session";

function main(): void {
  const params = new URLSearchParams(window.location.search);
  const endpoint = params.get("endpoint") ?? "ws://127.0.0.1:8700";
  const role = params.get("role") === "observer" ? "observer" : "driver";

  const canvas = document.getElementById("world") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d");
  if (ctx === null) {
    throw new Error("2D canvas unavailable");
  }

  const session = new Session({ url: endpoint, role });
  session.connect();

  const keyboard = new KeyboardState();
  window.addEventListener("keydown", (e) => keyboard.press(e.key));
  window.addEventListener("keyup", (e) => keyboard.release(e.key));

  const frame = () => {
    const pads = navigator.getGamepads?.() ?? [];
    const pad = pads.find((p) => p !== null) ?? null;
    session.setAxes(
      mergeAxes(keyboard.axes(), pad === null ? null : gamepadAxes(pad)),
    );

    canvas.width = canvas.clientWidth;
    canvas.height = canvas.clientHeight;
    renderFrame(ctx, session.view, performance.now(), canvas.width, canvas.height);
    requestAnimationFrame(frame);
  };
  requestAnimationFrame(frame);
}

main();
