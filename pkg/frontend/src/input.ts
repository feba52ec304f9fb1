/**
 * Device state -> per-tick input message mapping.
 *
 * Control scheme (gamepad with full keyboard fallback):
 *   left stick   move / dribble target velocity, magnitude scaled to [0,7] m/s
 *   right stick  target facing / kick direction / pass-target selection
 *   left trigger kick start while dribbling; lob angle (0.45,45] deg in kick
 *   right trigger target kick speed, [5,35] m/s
 *   left bumper  trap start        right bumper  kick start / ground pass
 *   B button     kick end / trap end      d-pad   player switch
 *
 * Axis outputs are clamped to their ranges; buttons are edge events.
 */

import { FsmStateName, InputMessage } from "./protocol.js";

export const MOVE_SPEED_MAX = 7.0; // m/s, magnitude of the move/dribble goal
export const KICK_SPEED_MIN = 5.0;
export const KICK_SPEED_MAX = 35.0;
export const LOB_ANGLE_MIN_DEG = 0.45;
export const LOB_ANGLE_MAX_DEG = 45.0;
export const STICK_DEADZONE = 0.12;

/** Raw device snapshot; synthetic in tests, polled from real devices live. */
export interface DeviceState {
  leftStick: [number, number];
  rightStick: [number, number];
  leftTrigger: number; // [0, 1]
  rightTrigger: number; // [0, 1]
  leftBumper: boolean;
  rightBumper: boolean;
  buttonB: boolean;
  buttonY: boolean;
  dpadLeft: boolean;
  dpadRight: boolean;
}

export function emptyDevice(): DeviceState {
  return {
    leftStick: [0, 0],
    rightStick: [0, 0],
    leftTrigger: 0,
    rightTrigger: 0,
    leftBumper: false,
    rightBumper: false,
    buttonB: false,
    buttonY: false,
    dpadLeft: false,
    dpadRight: false,
  };
}

function clampStick(v: [number, number]): [number, number] {
  let [x, y] = v;
  if (!isFinite(x)) x = 0;
  if (!isFinite(y)) y = 0;
  const mag = Math.hypot(x, y);
  if (mag < STICK_DEADZONE) return [0, 0];
  if (mag > 1) return [x / mag, y / mag];
  return [x, y];
}

const clamp01 = (v: number) => (isFinite(v) ? Math.min(Math.max(v, 0), 1) : 0);

/** Stateful edge detector over the previous device snapshot. */
export class InputMapper {
  private prev: DeviceState = emptyDevice();

  /** Map one device snapshot to an input message given the FSM state. */
  map(dev: DeviceState, fsm: FsmStateName): InputMessage {
    const prev = this.prev;
    const rose = (now: boolean, before: boolean) => now && !before;

    const move = clampStick(dev.leftStick);
    const face = clampStick(dev.rightStick);
    const lt = clamp01(dev.leftTrigger);
    const rt = clamp01(dev.rightTrigger);

    const buttons: InputMessage["buttons"] = {};
    if (rose(dev.leftBumper, prev.leftBumper)) buttons.trap_start = true;
    if (rose(dev.rightBumper, prev.rightBumper)) buttons.kick_start = true;
    // the left trigger doubles as a kick-start edge while dribbling
    if (fsm === "dribble" && lt > 0.5 && prev.leftTrigger <= 0.5) buttons.kick_start = true;
    if (rose(dev.buttonB, prev.buttonB)) {
      if (fsm === "kick") buttons.kick_end = true;
      if (fsm === "trap") buttons.trap_end = true;
    }

    let sw = 0;
    if (rose(dev.dpadLeft, prev.dpadLeft) || rose(dev.dpadRight, prev.dpadRight)) sw = 1;
    if (rose(dev.buttonY, prev.buttonY)) sw = 2;

    this.prev = { ...dev, leftStick: [...dev.leftStick], rightStick: [...dev.rightStick] };
    return { type: "input", move, face, lt, rt, buttons, switch: sw };
  }
}

/** Goal-space values implied by a mapped message (used for display + tests). */
export function impliedRanges(msg: InputMessage) {
  const moveSpeed = Math.hypot(msg.move[0], msg.move[1]) * MOVE_SPEED_MAX;
  const kickSpeed = KICK_SPEED_MIN + msg.rt * (KICK_SPEED_MAX - KICK_SPEED_MIN);
  const lobAngleDeg = LOB_ANGLE_MIN_DEG + msg.lt * (LOB_ANGLE_MAX_DEG - LOB_ANGLE_MIN_DEG);
  return { moveSpeed, kickSpeed, lobAngleDeg };
}

/** Keyboard fallback: tracked key set -> synthetic device state. */
export function keyboardDevice(keys: Set<string>): DeviceState {
  const dev = emptyDevice();
  let x = 0, y = 0;
  if (keys.has("KeyW")) y += 1;
  if (keys.has("KeyS")) y -= 1;
  if (keys.has("KeyA")) x -= 1;
  if (keys.has("KeyD")) x += 1;
  const n = Math.hypot(x, y);
  dev.leftStick = n > 0 ? [x / n, y / n] : [0, 0];
  let fx = 0, fy = 0;
  if (keys.has("ArrowUp")) fy += 1;
  if (keys.has("ArrowDown")) fy -= 1;
  if (keys.has("ArrowLeft")) fx -= 1;
  if (keys.has("ArrowRight")) fx += 1;
  const fn = Math.hypot(fx, fy);
  dev.rightStick = fn > 0 ? [fx / fn, fy / fn] : [0, 0];
  dev.leftTrigger = keys.has("KeyQ") ? 1 : 0;
  dev.rightTrigger = keys.has("ShiftLeft") ? 1 : 0.5;
  dev.leftBumper = keys.has("KeyE"); // trap start
  dev.rightBumper = keys.has("Space"); // kick start
  dev.buttonB = keys.has("KeyX"); // cancel
  dev.buttonY = keys.has("KeyC"); // closest-to-ball switch
  dev.dpadRight = keys.has("Tab"); // cycle players
  return dev;
}
