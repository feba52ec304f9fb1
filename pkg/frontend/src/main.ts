/**
 * Client entry: connect, poll devices at the display rate, throttle input
 * messages to 30 Hz, render the latest frame.
 */

import { InputMapper, keyboardDevice, emptyDevice, DeviceState } from "./input.js";
import { Session, SessionStatus } from "./net.js";
import { FrameMessage, ServerMessage } from "./protocol.js";
import { buildDrawModel, CanvasPainter } from "./render.js";

const INPUT_INTERVAL_MS = 1000 / 30;

function gamepadDevice(): DeviceState | null {
  const pads = navigator.getGamepads ? navigator.getGamepads() : [];
  const pad = Array.from(pads).find((p) => p && p.connected);
  if (!pad) return null;
  return {
    leftStick: [pad.axes[0] ?? 0, -(pad.axes[1] ?? 0)],
    rightStick: [pad.axes[2] ?? 0, -(pad.axes[3] ?? 0)],
    leftTrigger: pad.buttons[6]?.value ?? 0,
    rightTrigger: pad.buttons[7]?.value ?? 0,
    leftBumper: pad.buttons[4]?.pressed ?? false,
    rightBumper: pad.buttons[5]?.pressed ?? false,
    buttonB: pad.buttons[1]?.pressed ?? false,
    buttonY: pad.buttons[3]?.pressed ?? false,
    dpadLeft: pad.buttons[14]?.pressed ?? false,
    dpadRight: pad.buttons[15]?.pressed ?? false,
  };
}

function main(): void {
  const canvas = document.getElementById("field") as HTMLCanvasElement;
  const banner = document.getElementById("status") as HTMLElement;
  const painter = new CanvasPainter(canvas);
  const params = new URLSearchParams(location.search);
  const url =
    params.get("server") ??
    `ws://${location.hostname || "127.0.0.1"}:${params.get("port") ?? "8736"}/session`;

  let latest: FrameMessage | null = null;
  let status: SessionStatus = "connecting";
  let scenario = "";

  const session = new Session(url, {
    onMessage(msg: ServerMessage) {
      if (msg.type === "frame") latest = msg;
      else scenario = msg.scenario;
    },
    onStatus(s) {
      status = s;
      banner.textContent = s === "open" ? "" : `session ${s} (${url})`;
    },
  });
  session.connect();

  const keys = new Set<string>();
  window.addEventListener("keydown", (e) => keys.add(e.code));
  window.addEventListener("keyup", (e) => keys.delete(e.code));

  const mapper = new InputMapper();
  let lastSend = 0;

  function loop(now: number): void {
    if (latest && now - lastSend >= INPUT_INTERVAL_MS && status === "open") {
      const me = latest.players.find((p) => p.controlled);
      const dev = gamepadDevice() ?? (keys.size ? keyboardDevice(keys) : emptyDevice());
      session.send(mapper.map(dev, me?.fsm ?? "move"));
      lastSend = now;
    }
    if (latest) {
      painter.paint(buildDrawModel(latest), `${scenario} tick ${latest.tick} [${status}]`);
    }
    requestAnimationFrame(loop);
  }
  requestAnimationFrame(loop);
}

main();
