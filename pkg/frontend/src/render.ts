// Pure view -> HTML rendering. Deterministic: the same view object always
// produces the same markup, and nothing outside the view is consulted.

import { BeliefOverlay, MenuEntry, SessionView } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

function playerChip(index: number, alive: boolean, human: number): string {
  const classes = ["player"];
  if (!alive) classes.push("dead");
  if (index === human) classes.push("you");
  return `<span class="${classes.join(" ")}">player_${index}</span>`;
}

export function renderStatus(view: SessionView): string {
  const players = view.alive
    .map((alive, index) => playerChip(index, alive, view.human_seat))
    .join(" ");
  const state =
    view.status === "Finished"
      ? `<strong class="winner">${escapeHtml(view.reveal?.winner ?? "")} win${
          view.reveal?.winner === "Draw" ? "s nobody" : ""
        }</strong>`
      : `round ${view.round}, ${escapeHtml(view.phase)}`;
  return `<div class="status">${state}<div class="players">${players}</div></div>`;
}

export function renderTranscript(view: SessionView): string {
  const lines = view.transcript
    .split("\n")
    .map((line) => `<div class="line">${escapeHtml(line)}</div>`)
    .join("");
  return `<div class="transcript">${lines}</div>`;
}

export function renderPublicLog(view: SessionView): string {
  const items = view.public_log
    .map((line) => `<li>${escapeHtml(line)}</li>`)
    .join("");
  return `<ul class="public-log">${items}</ul>`;
}

function menuButton(entry: MenuEntry, selected: number | null, enabled: boolean): string {
  const classes = ["menu-action"];
  if (selected === entry.action) classes.push("selected");
  const exemplars = (entry.exemplars ?? [])
    .map((text) => `<div class="exemplar">${escapeHtml(text)}</div>`)
    .join("");
  const disabled = enabled ? "" : " disabled";
  return (
    `<button class="${classes.join(" ")}" data-action="${entry.action}"${disabled}>` +
    `${escapeHtml(entry.label)}${exemplars}</button>`
  );
}

export function renderMenu(view: SessionView, selected: number | null,
                           pending: boolean): string {
  if (view.status !== "AwaitingHuman") {
    return `<div class="menu waiting">${
      view.status === "Finished" ? "game over" : '<span class="spinner"></span> waiting'
    }</div>`;
  }
  const enabled = !pending;
  const buttons = view.menu
    .map((entry) => menuButton(entry, selected, enabled))
    .join("");
  return `<div class="menu">${buttons}</div>`;
}

export function renderReveal(view: SessionView): string {
  if (view.status !== "Finished" || !view.reveal) {
    return "";
  }
  const rows = view.reveal.roles
    .map(
      (role, index) =>
        `<tr><td>player_${index}</td><td>${escapeHtml(role)}</td>` +
        `<td>${view.reveal!.utilities[index]}</td></tr>`,
    )
    .join("");
  return (
    `<div class="reveal"><h3>Roles revealed</h3>` +
    `<table><tr><th>player</th><th>role</th><th>reward</th></tr>${rows}</table></div>`
  );
}

export function renderBeliefOverlay(overlay: BeliefOverlay | null): string {
  if (!overlay) {
    return "";
  }
  const rows = overlay.players
    .map((player, index) => {
      const bars = overlay.marginals[index]
        .map((p, role) => {
          const width = Math.round(p * 100);
          return (
            `<div class="bar role-${role}" style="width:${width}%">` +
            `${escapeHtml(overlay.roles[role])} ${(p * 100).toFixed(0)}%</div>`
          );
        })
        .join("");
      return `<div class="belief-row"><span>player_${player}</span>${bars}</div>`;
    })
    .join("");
  return `<div class="belief-overlay">${rows}</div>`;
}

export function renderError(message: string | null): string {
  return message ? `<div class="error">${escapeHtml(message)}</div>` : "";
}

export function renderView(view: SessionView, selected: number | null = null,
                           pending = false, error: string | null = null,
                           overlay: BeliefOverlay | null = null): string {
  return [
    renderStatus(view),
    renderError(error),
    renderPublicLog(view),
    renderTranscript(view),
    renderMenu(view, selected, pending),
    renderReveal(view),
    renderBeliefOverlay(overlay),
  ].join("\n");
}
