import type { EventRow, SummaryDoc } from "./types.js";

export interface Selection {
  group: string;
  date: string | null;
  hour: number | null;
}

// Central view state: one reviewer session per tab. Logout drops the
// token and every cached clip URL but keeps the selection, so logging
// back in lands on the same cell.
export class ViewState {
  loggedIn = false;
  reviewer: string | null = null;
  selection: Selection = { group: "", date: null, hour: null };
  summary: SummaryDoc | null = null;
  events: EventRow[] = [];
  activeClipEvent: string | null = null;

  private clipUrls = new Map<string, string>();
  private pendingVerdicts = new Set<string>();
  private listeners: Array<() => void> = [];
  private revokeUrl: (url: string) => void;

  constructor(revokeUrl: (url: string) => void = (u) => URL.revokeObjectURL(u)) {
    this.revokeUrl = revokeUrl;
  }

  subscribe(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  login(reviewer: string): void {
    this.loggedIn = true;
    this.reviewer = reviewer;
    this.notify();
  }

  logout(): void {
    this.loggedIn = false;
    this.reviewer = null;
    this.summary = null;
    this.events = [];
    this.activeClipEvent = null;
    for (const url of this.clipUrls.values()) this.revokeUrl(url);
    this.clipUrls.clear();
    this.pendingVerdicts.clear();
    this.notify();
  }

  setSummary(group: string, doc: SummaryDoc): void {
    if (group !== this.selection.group) {
      // rows fetched for the old group no longer match the selection
      this.selection = { group, date: null, hour: null };
      this.events = [];
      this.activeClipEvent = null;
    }
    this.summary = doc;
    this.notify();
  }

  setCell(date: string, hour: number, events: EventRow[]): void {
    this.selection = { ...this.selection, date, hour };
    this.events = events;
    this.notify();
  }

  setEvents(events: EventRow[]): void {
    this.events = events;
    this.notify();
  }

  // verdict submissions are serialized per event
  beginVerdict(eventId: string): boolean {
    if (this.pendingVerdicts.has(eventId)) return false;
    this.pendingVerdicts.add(eventId);
    this.notify();
    return true;
  }

  endVerdict(eventId: string): void {
    this.pendingVerdicts.delete(eventId);
    this.notify();
  }

  verdictPending(eventId: string): boolean {
    return this.pendingVerdicts.has(eventId);
  }

  cacheClip(eventId: string, url: string): void {
    const old = this.clipUrls.get(eventId);
    if (old) this.revokeUrl(old);
    this.clipUrls.set(eventId, url);
  }

  clipUrl(eventId: string): string | undefined {
    return this.clipUrls.get(eventId);
  }

  playClip(eventId: string): void {
    this.activeClipEvent = eventId;
    this.notify();
  }
}
