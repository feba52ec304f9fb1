/**
 * Top-down 2D render model: a pure function from the latest frame to a draw
 * list, plus the canvas painter.  Ball height shows as a shadow offset; a
 * colored dot above each player shows the active FSM state, red sphere trails
 * show the target velocity and a blue bar the target facing direction.
 */

import { FrameMessage, FSM_COLORS, PlayerView } from "./protocol.js";

export interface DrawPlayer {
  x: number;
  y: number;
  facing: [number, number];
  color: string;
  controlled: boolean;
  team: number;
}

export interface DrawMarker {
  kind: "velocity-dot" | "facing-bar";
  x: number;
  y: number;
  x2?: number;
  y2?: number;
}

export interface DrawModel {
  players: DrawPlayer[];
  ball: { x: number; y: number; height: number } | null;
  markers: DrawMarker[];
  tick: number;
}

export function buildDrawModel(frame: FrameMessage): DrawModel {
  const players: DrawPlayer[] = frame.players.map((p: PlayerView) => ({
    x: p.pos[0],
    y: p.pos[1],
    facing: p.facing,
    color: FSM_COLORS[p.fsm],
    controlled: p.controlled,
    team: p.team,
  }));
  const markers: DrawMarker[] = [];
  for (const p of frame.players) {
    if (!p.controlled || !p.goal) continue;
    const vel = (p.goal as any).velocity as number[] | undefined;
    if (vel && vel.length >= 2) {
      // sequence of dots along the target velocity
      for (let i = 1; i <= 4; i++) {
        markers.push({
          kind: "velocity-dot",
          x: p.pos[0] + (vel[0] * i) / 8,
          y: p.pos[1] + (vel[1] * i) / 8,
        });
      }
    }
    const face = (p.goal as any).facing as number[] | undefined;
    if (face && face.length >= 2) {
      markers.push({
        kind: "facing-bar",
        x: p.pos[0],
        y: p.pos[1],
        x2: p.pos[0] + face[0] * 1.2,
        y2: p.pos[1] + face[1] * 1.2,
      });
    }
  }
  const ball = frame.ball
    ? { x: frame.ball.pos[0], y: frame.ball.pos[1], height: frame.ball.pos[2] }
    : null;
  return { players, ball, markers, tick: frame.tick };
}

const FIELD_LENGTH = 105;
const FIELD_WIDTH = 68;

export class CanvasPainter {
  private ctx: CanvasRenderingContext2D;

  constructor(private canvas: HTMLCanvasElement) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("2d canvas context unavailable");
    this.ctx = ctx;
  }

  private toScreen(x: number, y: number): [number, number] {
    const sx = ((x + FIELD_LENGTH / 2) / FIELD_LENGTH) * this.canvas.width;
    const sy = ((FIELD_WIDTH / 2 - y) / FIELD_WIDTH) * this.canvas.height;
    return [sx, sy];
  }

  paint(model: DrawModel, status: string): void {
    const { ctx, canvas } = this;
    ctx.fillStyle = "#1d7a33";
    ctx.fillRect(0, 0, canvas.width, canvas.height);
    ctx.strokeStyle = "rgba(255,255,255,0.8)";
    ctx.lineWidth = 1;
    ctx.strokeRect(4, 4, canvas.width - 8, canvas.height - 8);
    ctx.beginPath();
    ctx.moveTo(canvas.width / 2, 4);
    ctx.lineTo(canvas.width / 2, canvas.height - 4);
    ctx.stroke();

    for (const m of model.markers) {
      const [x, y] = this.toScreen(m.x, m.y);
      if (m.kind === "velocity-dot") {
        ctx.fillStyle = "rgba(220,40,40,0.85)";
        ctx.beginPath();
        ctx.arc(x, y, 3, 0, Math.PI * 2);
        ctx.fill();
      } else if (m.x2 !== undefined && m.y2 !== undefined) {
        const [x2, y2] = this.toScreen(m.x2, m.y2);
        ctx.strokeStyle = "#3060ff";
        ctx.lineWidth = 3;
        ctx.beginPath();
        ctx.moveTo(x, y);
        ctx.lineTo(x2, y2);
        ctx.stroke();
      }
    }

    if (model.ball) {
      const [bx, by] = this.toScreen(model.ball.x, model.ball.y);
      const lift = Math.min(model.ball.height * 6, 40);
      ctx.fillStyle = "rgba(0,0,0,0.35)";
      ctx.beginPath();
      ctx.ellipse(bx, by, 4, 2.5, 0, 0, Math.PI * 2);
      ctx.fill();
      ctx.fillStyle = "#ffffff";
      ctx.beginPath();
      ctx.arc(bx, by - lift, 4, 0, Math.PI * 2);
      ctx.fill();
    }

    for (const p of model.players) {
      const [x, y] = this.toScreen(p.x, p.y);
      ctx.fillStyle = p.team === 0 ? "#e8e8ff" : "#222244";
      ctx.beginPath();
      ctx.arc(x, y, 7, 0, Math.PI * 2);
      ctx.fill();
      ctx.strokeStyle = "#000";
      ctx.beginPath();
      ctx.moveTo(x, y);
      ctx.lineTo(x + p.facing[0] * 12, y - p.facing[1] * 12);
      ctx.stroke();
      // FSM state dot above the head
      ctx.fillStyle = p.color;
      ctx.beginPath();
      ctx.arc(x, y - 12, 4, 0, Math.PI * 2);
      ctx.fill();
      if (p.controlled) {
        ctx.strokeStyle = "#ffd700";
        ctx.lineWidth = 2;
        ctx.beginPath();
        ctx.moveTo(x - 5, y - 22);
        ctx.lineTo(x, y - 17);
        ctx.lineTo(x + 5, y - 22);
        ctx.stroke();
      }
    }

    ctx.fillStyle = "#ffffff";
    ctx.font = "12px monospace";
    ctx.fillText(status, 10, canvas.height - 10);
  }
}
