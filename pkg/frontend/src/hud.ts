/**
 * Heads-up display state and rendering: score on top, oxygen timer in the
 * top-left, points needed at the bottom, floating "+N" bubbles for awards
 * and a camera-reticle crosshair. The score shown is always the last one
 * the server returned.
 */

export interface Bubble {
  text: string;
  x: number;
  y: number;
  ageMs: number;
}

export const BUBBLE_LIFETIME_MS = 1500;
export const BUBBLE_RISE_PX_PER_S = 40;

/** Points needed to pass a level: 4000 for the first, +2000 per level. */
export function requiredPoints(levelIndex: number): number {
  return 4000 + 2000 * (levelIndex - 1);
}

export class HudState {
  score = 0;
  needed: number;
  remainingMs = 0;
  bubbles: Bubble[] = [];
  crosshair: { x: number; y: number } | null = null;
  banner: string | null = null;
  result: { passed: boolean; required: number; achieved: number } | null = null;
  scoreFlashMs = 0;
  rejectFlashMs = 0;
  muted = false;

  constructor(needed: number) {
    this.needed = needed;
  }

  /** Apply a server click result; positive deltas float up as bubbles. */
  applyClickResult(delta: number, score: number, x: number, y: number): void {
    this.score = score;
    if (delta > 0) {
      this.bubbles.push({ text: `+${delta}`, x, y, ageMs: 0 });
    } else if (delta < 0) {
      this.scoreFlashMs = 600; // score visibly drops, no bubble
    }
  }

  rejectClick(): void {
    this.rejectFlashMs = 400;
  }

  step(dtMs: number): void {
    for (const b of this.bubbles) {
      b.ageMs += dtMs;
      b.y -= (BUBBLE_RISE_PX_PER_S * dtMs) / 1000;
    }
    this.bubbles = this.bubbles.filter((b) => b.ageMs < BUBBLE_LIFETIME_MS);
    this.scoreFlashMs = Math.max(0, this.scoreFlashMs - dtMs);
    this.rejectFlashMs = Math.max(0, this.rejectFlashMs - dtMs);
  }

  finish(result: { passed: boolean; required: number; achieved: number }): void {
    this.result = result;
  }
}

export function renderHud(
  ctx: CanvasRenderingContext2D,
  hud: HudState,
  width: number,
  height: number,
): void {
  ctx.save();
  ctx.textBaseline = "top";

  // score, top center
  ctx.font = "bold 22px sans-serif";
  ctx.textAlign = "center";
  ctx.fillStyle = hud.scoreFlashMs > 0 ? "#ff5050" : "#ffffff";
  ctx.strokeStyle = "rgba(0,0,0,0.7)";
  ctx.lineWidth = 4;
  ctx.strokeText(String(hud.score), width / 2, 8);
  ctx.fillText(String(hud.score), width / 2, 8);

  // oxygen timer, top left
  ctx.font = "16px sans-serif";
  ctx.textAlign = "left";
  ctx.fillStyle = "#9fdcff";
  const seconds = Math.max(0, hud.remainingMs / 1000);
  ctx.strokeText(`O2 ${seconds.toFixed(1)}s`, 10, 10);
  ctx.fillText(`O2 ${seconds.toFixed(1)}s`, 10, 10);

  // points needed, bottom center
  ctx.textAlign = "center";
  ctx.fillStyle = "#ffe28a";
  ctx.strokeText(`need ${hud.needed}`, width / 2, height - 26);
  ctx.fillText(`need ${hud.needed}`, width / 2, height - 26);

  // award bubbles
  ctx.font = "bold 18px sans-serif";
  for (const b of hud.bubbles) {
    const alpha = 1 - b.ageMs / BUBBLE_LIFETIME_MS;
    ctx.fillStyle = `rgba(140, 255, 140, ${alpha.toFixed(3)})`;
    ctx.fillText(b.text, b.x, b.y);
  }

  // crosshair reticle
  if (hud.crosshair) {
    const { x, y } = hud.crosshair;
    ctx.strokeStyle = hud.rejectFlashMs > 0 ? "#ff5050" : "#ffffff";
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.arc(x, y, 12, 0, Math.PI * 2);
    ctx.moveTo(x - 18, y);
    ctx.lineTo(x - 6, y);
    ctx.moveTo(x + 6, y);
    ctx.lineTo(x + 18, y);
    ctx.moveTo(x, y - 18);
    ctx.lineTo(x, y - 6);
    ctx.moveTo(x, y + 6);
    ctx.lineTo(x, y + 18);
    ctx.stroke();
  }

  // network banner
  if (hud.banner) {
    ctx.fillStyle = "rgba(0,0,0,0.65)";
    ctx.fillRect(0, height / 2 - 22, width, 44);
    ctx.fillStyle = "#ffffff";
    ctx.font = "16px sans-serif";
    ctx.fillText(hud.banner, width / 2, height / 2 - 9);
  }

  // pass/fail overlay
  if (hud.result) {
    ctx.fillStyle = "rgba(0,0,0,0.75)";
    ctx.fillRect(0, 0, width, height);
    ctx.fillStyle = hud.result.passed ? "#7dff9b" : "#ff7d7d";
    ctx.font = "bold 34px sans-serif";
    ctx.fillText(hud.result.passed ? "LEVEL PASSED" : "LEVEL FAILED", width / 2, height / 2 - 40);
    ctx.fillStyle = "#ffffff";
    ctx.font = "18px sans-serif";
    ctx.fillText(
      `${hud.result.achieved} / ${hud.result.required} points`,
      width / 2,
      height / 2 + 8,
    );
  }
  ctx.restore();
}
