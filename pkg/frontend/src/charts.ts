import type { BoxDoc, SummaryDoc } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

// Layout constants; data values always come from the API document.
const COLUMN_W = 36;
const COLUMN_GAP = 20;
const PLOT_H = 180;
const MARGIN_L = 16;
const MARGIN_TOP = 28;
const LABEL_H = 36;

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    el.setAttribute(key, value);
  }
  return el;
}

function textEl(x: number, y: number, content: string, cls: string): SVGTextElement {
  const el = svgEl("text", {
    x: String(x),
    y: String(y),
    class: cls,
    "text-anchor": "middle",
  });
  el.textContent = content;
  return el;
}

// Distinct hue per hour of day, stable across charts.
export function hourColor(hour: number): string {
  return `hsl(${(hour * 137.5) % 360}, 55%, 52%)`;
}

function emptyState(message: string): HTMLElement {
  const p = document.createElement("p");
  p.className = "empty-state";
  p.textContent = message;
  return p;
}

export type SegmentHandler = (date: string, hour: number) => void;

// Stacked column chart: one column per recorded day, one color band per
// hour with the earliest hour at the bottom of the stack. Bands are
// clickable and carry their (date, hour) in data attributes.
export function stackedColumns(
  doc: SummaryDoc,
  onSegment: SegmentHandler,
): Element {
  const { dates, hours, counts } = doc.matrix;
  if (dates.length === 0 || doc.total === 0) {
    return emptyState("no events in this window");
  }
  const totals = dates.map((d) => doc.daily_totals[d] ?? 0);
  const peak = Math.max(...totals);
  const scale = peak > 0 ? PLOT_H / peak : 0;
  const width = MARGIN_L * 2 + dates.length * (COLUMN_W + COLUMN_GAP);
  const height = MARGIN_TOP + PLOT_H + LABEL_H;

  const svg = svgEl("svg", {
    viewBox: `0 0 ${width} ${height}`,
    width: String(width),
    height: String(height),
    class: "stacked-columns",
    role: "img",
  });
  const baseline = MARGIN_TOP + PLOT_H;

  dates.forEach((date, col) => {
    const x = MARGIN_L + col * (COLUMN_W + COLUMN_GAP);
    let y = baseline;
    hours.forEach((hour, row) => {
      const count = counts[col]?.[row] ?? 0;
      if (count === 0) return;
      const h = count * scale;
      y -= h;
      const rect = svgEl("rect", {
        x: String(x),
        y: String(y),
        width: String(COLUMN_W),
        height: String(h),
        fill: hourColor(hour),
        class: "segment",
        "data-date": date,
        "data-hour": String(hour),
      });
      const title = svgEl("title", {});
      title.textContent = `${date} ${String(hour).padStart(2, "0")}:00 - ${count}`;
      rect.appendChild(title);
      rect.addEventListener("click", () => onSegment(date, hour));
      svg.appendChild(rect);
    });
    const total = doc.daily_totals[date] ?? 0;
    svg.appendChild(textEl(x + COLUMN_W / 2, y - 6, String(total), "total"));
    svg.appendChild(
      textEl(x + COLUMN_W / 2, baseline + 16, date.slice(5), "date-label"),
    );
  });
  return svg;
}

// Hour legend for the stacked chart: a swatch per hour that has data.
export function hourLegend(doc: SummaryDoc): Element {
  const { hours, counts } = doc.matrix;
  const used = hours.filter((_, row) =>
    counts.some((dayRow) => (dayRow[row] ?? 0) > 0),
  );
  const list = document.createElement("ul");
  list.className = "hour-legend";
  for (const hour of used) {
    const item = document.createElement("li");
    const swatch = document.createElement("span");
    swatch.className = "swatch";
    swatch.style.backgroundColor = hourColor(hour);
    item.appendChild(swatch);
    item.appendChild(
      document.createTextNode(`${String(hour).padStart(2, "0")}:00`),
    );
    list.appendChild(item);
  }
  return list;
}

// Box plot of the per-hour daily distributions, one glyph per hour,
// drawn straight from the server's box documents.
export function boxPlot(doc: SummaryDoc): Element {
  const hours = Object.keys(doc.box)
    .map(Number)
    .sort((a, b) => a - b);
  if (hours.length === 0) {
    return emptyState("no per-hour statistics in this window");
  }
  const boxes = hours.map((h) => doc.box[String(h)] as BoxDoc);
  const top = Math.max(...boxes.map((b) => Math.max(b.max, ...b.outliers)));
  const scale = top > 0 ? PLOT_H / top : 0;
  const width = MARGIN_L * 2 + hours.length * (COLUMN_W + COLUMN_GAP);
  const height = MARGIN_TOP + PLOT_H + LABEL_H;
  const svg = svgEl("svg", {
    viewBox: `0 0 ${width} ${height}`,
    width: String(width),
    height: String(height),
    class: "box-plot",
    role: "img",
  });
  const baseline = MARGIN_TOP + PLOT_H;
  const yOf = (value: number) => baseline - value * scale;

  hours.forEach((hour, i) => {
    const box = boxes[i] as BoxDoc;
    const x = MARGIN_L + i * (COLUMN_W + COLUMN_GAP);
    const mid = x + COLUMN_W / 2;
    const glyph = svgEl("g", {
      class: "box-glyph",
      "data-hour": String(hour),
      stroke: hourColor(hour),
    });
    glyph.appendChild(
      svgEl("line", {
        x1: String(mid), y1: String(yOf(box.min)),
        x2: String(mid), y2: String(yOf(box.max)),
        class: "whisker",
      }),
    );
    glyph.appendChild(
      svgEl("rect", {
        x: String(x),
        y: String(yOf(box.q3)),
        width: String(COLUMN_W),
        height: String(Math.max(1, yOf(box.q1) - yOf(box.q3))),
        fill: hourColor(hour),
        "fill-opacity": "0.35",
        class: "iqr",
      }),
    );
    glyph.appendChild(
      svgEl("line", {
        x1: String(x), y1: String(yOf(box.median)),
        x2: String(x + COLUMN_W), y2: String(yOf(box.median)),
        class: "median",
      }),
    );
    for (const value of box.outliers) {
      glyph.appendChild(
        svgEl("circle", {
          cx: String(mid), cy: String(yOf(value)), r: "2.5", class: "outlier",
        }),
      );
    }
    const title = svgEl("title", {});
    title.textContent =
      `${String(hour).padStart(2, "0")}:00  min ${box.min}  q1 ${box.q1}  ` +
      `median ${box.median}  q3 ${box.q3}  max ${box.max}  mean ${box.mean}`;
    glyph.appendChild(title);
    svg.appendChild(glyph);
    svg.appendChild(
      textEl(mid, baseline + 16, String(hour).padStart(2, "0"), "hour-label"),
    );
  });
  return svg;
}
