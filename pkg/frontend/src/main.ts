/**
 * DOM bootstrap: level menu, canvas playback loop, pointer wiring and the
 * mute/quit buttons. Everything game-logical lives in the other modules.
 */

import { GameApi, LevelDescriptor } from "./api.js";
import { renderHud } from "./hud.js";
import { LevelSession, startLevel } from "./game.js";

const api = new GameApi();
const canvas = document.getElementById("stage") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const menu = document.getElementById("menu") as HTMLDivElement;
const muteButton = document.getElementById("mute") as HTMLButtonElement;
const quitButton = document.getElementById("quit") as HTMLButtonElement;

let session: LevelSession | null = null;
let rafHandle = 0;
let lastTick = 0;

function playerName(): string {
  const key = "clickseg-player";
  let name = localStorage.getItem(key);
  if (!name) {
    name = `player-${Math.random().toString(36).slice(2, 8)}`;
    localStorage.setItem(key, name);
  }
  return name;
}

async function showMenu(): Promise<void> {
  session = null;
  cancelAnimationFrame(rafHandle);
  const levels = await api.listLevels();
  menu.innerHTML = "<h1>clickseg</h1><p>Click the moving objects. Big ones pay more; spamming one spot pays less.</p>";
  for (const level of levels) {
    const button = document.createElement("button");
    button.textContent =
      `Level ${level.index}: ${level.id} ` +
      `(${(level.frames / level.frame_rate).toFixed(0)}s, ` +
      `${level.required_points} pts to pass)`;
    button.addEventListener("click", () => void play(level));
    menu.appendChild(button);
  }
  menu.hidden = false;
  canvas.hidden = true;
}

async function play(level: LevelDescriptor): Promise<void> {
  menu.hidden = true;
  canvas.hidden = false;
  canvas.width = level.width;
  canvas.height = level.height;
  session = await startLevel(api, level, playerName());
  session.playback.start();
  lastTick = performance.now();
  loop();
}

function loop(): void {
  if (!session) return;
  const s = session;
  const nowMs = performance.now();
  const dt = nowMs - lastTick;
  lastTick = nowMs;

  s.playback.tick();
  s.hud.remainingMs = s.playback.remainingMs();
  s.hud.step(dt);

  const frame = s.frames.get(s.playback.displayedIndex());
  ctx.fillStyle = "#000";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  if (frame) {
    ctx.drawImage(frame, 0, 0, canvas.width, canvas.height);
  }
  renderHud(ctx, s.hud, canvas.width, canvas.height);

  if (s.playback.finished() && !s.hud.result) {
    void s.finish().then(() => {
      setTimeout(() => void showMenu(), 4000);
    });
  }
  rafHandle = requestAnimationFrame(loop);
}

function canvasPoint(event: PointerEvent): { x: number; y: number } {
  const rect = canvas.getBoundingClientRect();
  return {
    x: ((event.clientX - rect.left) / rect.width) * canvas.width,
    y: ((event.clientY - rect.top) / rect.height) * canvas.height,
  };
}

canvas.addEventListener("pointerdown", (event) => {
  const p = canvasPoint(event);
  session?.pointerDown(p.x, p.y);
});
canvas.addEventListener("pointermove", (event) => {
  const p = canvasPoint(event);
  session?.pointerMove(p.x, p.y);
});

muteButton.addEventListener("click", () => {
  if (session) {
    session.hud.muted = !session.hud.muted;
    muteButton.textContent = session.hud.muted ? "unmute" : "mute";
  }
});
quitButton.addEventListener("click", () => void showMenu());

void showMenu();
