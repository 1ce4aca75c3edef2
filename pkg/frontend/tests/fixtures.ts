import type { EventRow, SummaryDoc } from "../src/types.js";

// Shapes mirror real service responses for a three-day dwell window.
export function summaryFixture(): SummaryDoc {
  return {
    box: {
      "10": {
        min: 1,
        q1: 1.5,
        median: 2,
        q3: 2.5,
        max: 3,
        mean: 2,
        outliers: [],
      },
      "14": {
        min: 0,
        q1: 0.5,
        median: 1,
        q3: 3.5,
        max: 6,
        mean: 2.3333333333333335,
        outliers: [6],
      },
    },
    group: "sb_stop",
    kind: "dwell",
    window: {
      dates: ["2020-03-10", "2020-03-11", "2020-03-12"],
      hours: [10, 14],
    },
    matrix: {
      dates: ["2020-03-10", "2020-03-11", "2020-03-12"],
      hours: [10, 14],
      counts: [
        [3, 0],
        [1, 1],
        [2, 6],
      ],
    },
    daily_totals: {
      "2020-03-10": 3,
      "2020-03-11": 2,
      "2020-03-12": 8,
    },
    total: 13,
    events: 13,
  };
}

export function eventRowsFixture(): EventRow[] {
  const base = {
    kind: "dwell",
    camera_id: "cam42",
    roi_group: "sb_stop",
    date: "2020-03-10",
    hour: 10,
    detection_count: 140,
    position: [512, 402] as [number, number],
    count: 1,
    clip: null,
    annotations: [],
  };
  return [
    {
      ...base,
      event_id: "sb_stop-cam42-000020",
      f_b: 20,
      f_e: 320,
      p: 1,
      t_b: "2020-03-10T10:00:02-05:00",
      t_e: "2020-03-10T10:00:32-05:00",
    },
    {
      ...base,
      event_id: "sb_stop-cam42-000600",
      f_b: 600,
      f_e: 850,
      p: 1,
      t_b: "2020-03-10T10:01:00-05:00",
      t_e: "2020-03-10T10:01:25-05:00",
      annotations: [
        {
          event_id: "sb_stop-cam42-000600",
          verdict: "confirmed",
          note: "",
          reviewer: "ana",
          ts: "2020-03-15T12:00:00+00:00",
        },
      ],
    },
    {
      ...base,
      event_id: "sb_stop-cam42-001100",
      f_b: 1100,
      f_e: 1300,
      p: 1,
      t_b: "2020-03-10T10:01:50-05:00",
      t_e: "2020-03-10T10:02:10-05:00",
    },
  ];
}
