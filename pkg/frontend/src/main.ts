import { ApiClient, ApiError } from "./api.js";
import { boxPlot, hourLegend, stackedColumns } from "./charts.js";
import { ViewState } from "./state.js";
import type { Verdict } from "./types.js";
import {
  renderBanner,
  renderEventsTable,
  renderLogin,
  renderPlayer,
  showFormError,
  showVerdictError,
} from "./views.js";

// Top-level wiring: every render is a pure function of ViewState, and
// ViewState only changes from API responses.
export class App {
  private root: HTMLElement | null = null;
  private banner: string | null = null;

  constructor(
    readonly api: ApiClient,
    readonly state: ViewState,
  ) {
    api.onAuthExpired = () => {
      this.banner = "session expired, sign in to continue";
      state.logout();
    };
    state.subscribe(() => this.render());
  }

  mount(root: HTMLElement): void {
    this.root = root;
    this.render();
  }

  async login(user: string, password: string): Promise<void> {
    try {
      await this.api.login(user, password);
      this.banner = null;
      this.state.login(user);
      // restore whatever was on screen before the session expired
      const { group, date, hour } = this.state.selection;
      if (group) await this.loadSummary(group);
      if (group && date !== null && hour !== null) {
        await this.drilldown(date, hour);
      }
    } catch (error) {
      if (this.root) {
        showFormError(this.root, describe(error));
      }
    }
  }

  async loadSummary(group: string): Promise<void> {
    try {
      const doc = await this.api.summary(group);
      this.banner = null;
      this.state.setSummary(group, doc);
    } catch (error) {
      this.banner = `summary unavailable: ${describe(error)}`;
      this.render();
    }
  }

  async drilldown(date: string, hour: number): Promise<void> {
    const { group } = this.state.selection;
    try {
      const doc = await this.api.events(date, hour, group);
      this.state.setCell(date, hour, doc.events);
    } catch (error) {
      this.banner = `events unavailable: ${describe(error)}`;
      this.render();
    }
  }

  async play(eventId: string): Promise<void> {
    try {
      if (!this.state.clipUrl(eventId)) {
        const blob = await this.api.clipBlob(eventId);
        this.state.cacheClip(eventId, URL.createObjectURL(blob));
      }
      this.state.playClip(eventId);
    } catch (error) {
      this.banner = `clip unavailable: ${describe(error)}`;
      this.render();
    }
  }

  async submitVerdict(
    eventId: string,
    verdict: Verdict,
    note: string,
  ): Promise<void> {
    if (!this.state.beginVerdict(eventId)) return;
    const { group, date, hour } = this.state.selection;
    try {
      await this.api.submitVerdict(eventId, verdict, note);
      // re-render from the server's stored state, never optimistically
      if (date !== null && hour !== null) {
        const doc = await this.api.events(date, hour, group);
        this.state.setEvents(doc.events);
      }
    } catch (error) {
      const row = this.root?.querySelector(`tr[data-event-id="${eventId}"]`);
      if (row) showVerdictError(row, describe(error));
    } finally {
      this.state.endVerdict(eventId);
    }
  }

  render(): void {
    if (!this.root) return;
    const root = this.root;
    root.textContent = "";
    if (this.banner) {
      root.appendChild(renderBanner(this.banner));
    }
    if (!this.state.loggedIn) {
      root.appendChild(renderLogin((user, password) => this.login(user, password)));
      return;
    }
    root.appendChild(this.toolbar());

    const summarySection = document.createElement("section");
    summarySection.className = "summary";
    if (this.state.summary) {
      summarySection.appendChild(
        stackedColumns(this.state.summary, (date, hour) =>
          this.drilldown(date, hour),
        ),
      );
      summarySection.appendChild(hourLegend(this.state.summary));
      summarySection.appendChild(boxPlot(this.state.summary));
    }
    root.appendChild(summarySection);

    const eventsSection = document.createElement("section");
    eventsSection.className = "drilldown";
    const { date, hour } = this.state.selection;
    if (date !== null && hour !== null) {
      const heading = document.createElement("h3");
      heading.textContent = `${date} ${String(hour).padStart(2, "0")}:00`;
      eventsSection.appendChild(heading);
      eventsSection.appendChild(
        renderEventsTable(this.state.events, {
          onPlay: (id) => this.play(id),
          onVerdict: (id, verdict, note) => this.submitVerdict(id, verdict, note),
          verdictPending: (id) => this.state.verdictPending(id),
        }),
      );
    }
    root.appendChild(eventsSection);

    const active = this.state.activeClipEvent;
    if (active) {
      const url = this.state.clipUrl(active);
      if (url) root.appendChild(renderPlayer(active, url));
    }
  }

  private toolbar(): HTMLElement {
    const bar = document.createElement("nav");
    bar.className = "toolbar";
    const group = document.createElement("input");
    group.placeholder = "ROI group";
    group.value = this.state.selection.group;
    const load = document.createElement("button");
    load.type = "button";
    load.textContent = "load";
    load.addEventListener("click", () => void this.loadSummary(group.value));
    const spacer = document.createElement("span");
    spacer.className = "spacer";
    spacer.textContent = this.state.reviewer ?? "";
    const logout = document.createElement("button");
    logout.type = "button";
    logout.className = "logout";
    logout.textContent = "sign out";
    logout.addEventListener("click", () => {
      this.api.clearToken();
      this.state.logout();
    });
    bar.append(group, load, spacer, logout);
    return bar;
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) return error.message;
  return error instanceof Error ? error.message : String(error);
}
