/** Strata timeline: one lane per stratum, segments as half-open boxes.
 * Pure layout math; the DOM layer just positions divs from these numbers. */

import type { SegmentDoc, StratumDoc } from "./types";

export interface SegmentBox {
  segmentId: string;
  modelId: string;
  /** pixel offsets within the lane; the right edge is exclusive */
  left: number;
  width: number;
  startMs: number;
  endMs: number;
  version: number;
}

export interface Lane {
  stratumId: string;
  kind: string;
  boxes: SegmentBox[];
}

export interface TimelineLayout {
  mediaId: string;
  durationMs: number;
  pxPerMs: number;
  lanes: Lane[];
}

export function layoutTimeline(
  mediaId: string,
  durationMs: number,
  strata: StratumDoc[],
  segments: SegmentDoc[],
  widthPx: number,
): TimelineLayout {
  const pxPerMs = widthPx / durationMs;
  const mine = strata
    .filter((s) => s.media_id === mediaId)
    .sort((a, b) => (a.kind < b.kind ? -1 : a.kind > b.kind ? 1 : a.id < b.id ? -1 : 1));
  const byStratum = new Map<string, SegmentDoc[]>();
  for (const seg of segments) {
    const bucket = byStratum.get(seg.stratum_id) ?? [];
    bucket.push(seg);
    byStratum.set(seg.stratum_id, bucket);
  }
  return {
    mediaId,
    durationMs,
    pxPerMs,
    lanes: mine.map((stratum) => ({
      stratumId: stratum.id,
      kind: stratum.kind,
      boxes: (byStratum.get(stratum.id) ?? [])
        .sort((a, b) => a.start_ms - b.start_ms || (a.id < b.id ? -1 : 1))
        .map((seg) => ({
          segmentId: seg.id,
          modelId: seg.model_id,
          left: seg.start_ms * pxPerMs,
          width: (seg.end_ms - seg.start_ms) * pxPerMs,
          startMs: seg.start_ms,
          endMs: seg.end_ms,
          version: seg.version,
        })),
    })),
  };
}

/** Half-open containment: the start instant belongs to the box, the end
 * instant does not (same convention as the corpus store). */
export function boxContains(box: SegmentBox, tMs: number): boolean {
  return box.startMs <= tMs && tMs < box.endMs;
}

/** Segments under the playhead, grouped by stratum kind. */
export function segmentsAtInstant(layout: TimelineLayout, tMs: number): Record<string, SegmentBox[]> {
  const groups: Record<string, SegmentBox[]> = {};
  for (const lane of layout.lanes) {
    const hits = lane.boxes.filter((b) => boxContains(b, tMs));
    if (hits.length) {
      groups[lane.kind] = [...(groups[lane.kind] ?? []), ...hits];
    }
  }
  return groups;
}

const escapeHtml = (s: string): string =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");

export function timelineToHtml(layout: TimelineLayout): string {
  const lanes = layout.lanes.map((lane) => {
    const boxes = lane.boxes
      .map(
        (b) =>
          `    <div class="segment" data-segment="${escapeHtml(b.segmentId)}" ` +
          `style="left:${b.left.toFixed(2)}px;width:${b.width.toFixed(2)}px" ` +
          `title="[${b.startMs} ms, ${b.endMs} ms)"></div>`,
      )
      .join("\n");
    return `  <div class="lane" data-kind="${escapeHtml(lane.kind)}" data-stratum="${escapeHtml(lane.stratumId)}">
${boxes}
  </div>`;
  });
  return `<div class="timeline" data-media="${escapeHtml(layout.mediaId)}">
${lanes.join("\n")}
</div>`;
}
