import type { AnnotationDoc, EventRow, Verdict } from "./types.js";

const VERDICTS: Verdict[] = ["confirmed", "false_positive", "unsure"];

export interface LoginHandler {
  (user: string, password: string): void;
}

export function renderLogin(onSubmit: LoginHandler): HTMLElement {
  const form = document.createElement("form");
  form.className = "login";
  form.innerHTML = `
    <h2>Reviewer sign-in</h2>
    <label>User <input name="user" autocomplete="username" required></label>
    <label>Password
      <input name="password" type="password" autocomplete="current-password" required>
    </label>
    <button type="submit">Sign in</button>
    <p class="form-error" hidden></p>
  `;
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(form);
    onSubmit(String(data.get("user") ?? ""), String(data.get("password") ?? ""));
  });
  return form;
}

export function showFormError(root: ParentNode, message: string): void {
  const slot = root.querySelector<HTMLElement>(".form-error");
  if (slot) {
    slot.textContent = message;
    slot.hidden = false;
  }
}

function badge(annotation: AnnotationDoc): HTMLElement {
  const span = document.createElement("span");
  span.className = `badge badge-${annotation.verdict}`;
  span.textContent = `${annotation.reviewer}: ${annotation.verdict}`;
  span.title = annotation.note || annotation.ts;
  return span;
}

export interface TableHandlers {
  onPlay(eventId: string): void;
  onVerdict(eventId: string, verdict: Verdict, note: string): void;
  verdictPending(eventId: string): boolean;
}

// The drill-down table mirrors the get_events response exactly: one
// row per event in server order, badges straight from the stored
// annotations. Verdict submissions go through onVerdict; rows are only
// updated from a fresh server response, never optimistically.
export function renderEventsTable(
  rows: EventRow[],
  handlers: TableHandlers,
): HTMLElement {
  if (rows.length === 0) {
    const p = document.createElement("p");
    p.className = "empty-state";
    p.textContent = "no events in this hour";
    return p;
  }
  const table = document.createElement("table");
  table.className = "events";
  table.innerHTML = `
    <thead><tr>
      <th>start</th><th>kind</th><th>frames</th><th>count</th>
      <th>review</th><th>verdict</th>
    </tr></thead>
  `;
  const body = document.createElement("tbody");
  for (const row of rows) {
    body.appendChild(renderEventRow(row, handlers));
  }
  table.appendChild(body);
  return table;
}

function renderEventRow(row: EventRow, handlers: TableHandlers): HTMLElement {
  const tr = document.createElement("tr");
  tr.dataset.eventId = row.event_id;

  const start = document.createElement("td");
  const playButton = document.createElement("button");
  playButton.type = "button";
  playButton.className = "play";
  playButton.textContent = `▶ ${row.t_b.slice(11, 19)}`;
  playButton.addEventListener("click", () => handlers.onPlay(row.event_id));
  start.appendChild(playButton);
  tr.appendChild(start);

  const kind = document.createElement("td");
  kind.textContent = row.kind;
  tr.appendChild(kind);

  const frames = document.createElement("td");
  frames.textContent = `${row.f_b}-${row.f_e}`;
  tr.appendChild(frames);

  const count = document.createElement("td");
  count.className = "count";
  count.textContent = String(row.count);
  tr.appendChild(count);

  const review = document.createElement("td");
  review.className = "badges";
  for (const annotation of row.annotations) {
    review.appendChild(badge(annotation));
  }
  tr.appendChild(review);

  tr.appendChild(verdictCell(row, handlers));
  return tr;
}

function verdictCell(row: EventRow, handlers: TableHandlers): HTMLElement {
  const td = document.createElement("td");
  td.className = "verdict-cell";
  const select = document.createElement("select");
  for (const verdict of VERDICTS) {
    const option = document.createElement("option");
    option.value = verdict;
    option.textContent = verdict;
    select.appendChild(option);
  }
  const note = document.createElement("input");
  note.type = "text";
  note.placeholder = "note";
  const submit = document.createElement("button");
  submit.type = "button";
  submit.textContent = "save";
  submit.disabled = handlers.verdictPending(row.event_id);
  submit.addEventListener("click", () => {
    handlers.onVerdict(row.event_id, select.value as Verdict, note.value);
  });
  const error = document.createElement("span");
  error.className = "verdict-error";
  error.hidden = true;
  td.append(select, note, submit, error);
  return td;
}

export function showVerdictError(tr: ParentNode, message: string): void {
  const slot = tr.querySelector<HTMLElement>(".verdict-error");
  const submit = tr.querySelector<HTMLButtonElement>(".verdict-cell button");
  if (slot) {
    slot.textContent = message;
    slot.hidden = false;
  }
  if (submit) submit.disabled = false;
}

export function renderPlayer(eventId: string, clipUrl: string): HTMLElement {
  const figure = document.createElement("figure");
  figure.className = "player";
  const video = document.createElement("video");
  video.controls = true;
  video.src = clipUrl;
  const caption = document.createElement("figcaption");
  caption.textContent = eventId;
  figure.append(video, caption);
  return figure;
}

export function renderBanner(message: string, onRetry?: () => void): HTMLElement {
  const div = document.createElement("div");
  div.className = "banner";
  div.textContent = message;
  if (onRetry) {
    const retry = document.createElement("button");
    retry.type = "button";
    retry.textContent = "retry";
    retry.addEventListener("click", onRetry);
    div.appendChild(retry);
  }
  return div;
}
