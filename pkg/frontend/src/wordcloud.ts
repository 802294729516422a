/** Wordcloud panel: token spans whose font size is monotone in the
 * server-provided count. Ties share a size and keep the server order. */

import type { WordcloudCounts } from "./types.js";

export const MIN_FONT_PX = 12;
export const MAX_FONT_PX = 38;

export function fontSizes(counts: readonly number[]): number[] {
  if (counts.length === 0) {
    return [];
  }
  const lo = Math.min(...counts);
  const hi = Math.max(...counts);
  if (hi === lo) {
    return counts.map(() => (MIN_FONT_PX + MAX_FONT_PX) / 2);
  }
  return counts.map(
    (c) => MIN_FONT_PX + ((c - lo) / (hi - lo)) * (MAX_FONT_PX - MIN_FONT_PX),
  );
}

export function renderWordcloud(container: HTMLElement, counts: WordcloudCounts): void {
  container.textContent = "";
  if (counts.length === 0) {
    const empty = container.ownerDocument.createElement("p");
    empty.className = "wordcloud-empty";
    empty.textContent = "no vocabulary in the selection";
    container.appendChild(empty);
    return;
  }
  const sizes = fontSizes(counts.map(([, count]) => count));
  counts.forEach(([token, count], index) => {
    const span = container.ownerDocument.createElement("span");
    span.className = "wordcloud-token";
    span.textContent = token;
    span.title = `${token}: ${count}`;
    span.style.fontSize = `${sizes[index].toFixed(1)}px`;
    span.dataset.count = String(count);
    container.appendChild(span);
  });
}
