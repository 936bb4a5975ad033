import type { MetricInfo, PredictionResponse } from "./types.js";

const GROUP_ORDER = ["latency", "responsiveness", "smoothness"] as const;

/** One decimal place everywhere, matching the card contract. */
export function formatValue(value: number): string {
  return Math.max(0, value).toFixed(1);
}

export interface MetricPanelHandle {
  root: HTMLElement;
  update(response: PredictionResponse): void;
  updateCompare(response: PredictionResponse): void;
  clearCompare(): void;
  readValue(metricId: string): string;
  readDelta(metricId: string): string;
}

interface Card {
  value: HTMLElement;
  compare: HTMLElement;
  delta: HTMLElement;
  info: MetricInfo;
  current: number | null;
  other: number | null;
}

/**
 * The nine metric cards in three group columns.  Each card shows the
 * predicted value with its unit; in compare mode it also shows the second
 * spec's value and a signed delta colored by whether the change is an
 * improvement for that metric's direction.
 */
export function buildMetricPanel(metrics: MetricInfo[]): MetricPanelHandle {
  const root = document.createElement("section");
  root.className = "metric-panel";
  const cards = new Map<string, Card>();

  for (const group of GROUP_ORDER) {
    const column = document.createElement("div");
    column.className = "metric-group";
    const heading = document.createElement("h2");
    heading.textContent = group;
    column.appendChild(heading);
    for (const info of metrics.filter((m) => m.group === group)) {
      const card = document.createElement("article");
      card.className = "metric-card";
      card.dataset.metric = info.id;

      const name = document.createElement("h3");
      name.textContent = info.id.replace(/_/g, " ");
      const value = document.createElement("p");
      value.className = "metric-value";
      value.textContent = "-";
      const compare = document.createElement("p");
      compare.className = "metric-compare hidden";
      const delta = document.createElement("p");
      delta.className = "metric-delta hidden";
      const description = document.createElement("p");
      description.className = "metric-description";
      description.textContent =
        `${info.description} (${info.direction === "lower" ? "lower" : "higher"} is better)`;

      card.append(name, value, compare, delta, description);
      column.appendChild(card);
      cards.set(info.id, {
        value, compare, delta, info, current: null, other: null,
      });
    }
    root.appendChild(column);
  }

  function renderDelta(card: Card): void {
    if (card.current === null || card.other === null) {
      card.delta.classList.add("hidden");
      card.compare.classList.add("hidden");
      return;
    }
    const a = Number(formatValue(card.current));
    const b = Number(formatValue(card.other));
    const delta = b - a;
    card.compare.textContent = `B: ${formatValue(card.other)} ${card.info.unit}`;
    card.compare.classList.remove("hidden");
    const sign = delta > 0 ? "+" : "";
    card.delta.textContent = `Δ ${sign}${delta.toFixed(1)} ${card.info.unit}`;
    card.delta.classList.remove("hidden");
    card.delta.classList.remove("better", "worse", "neutral");
    if (delta === 0) {
      card.delta.classList.add("neutral");
    } else {
      const improved = card.info.direction === "lower" ? delta < 0 : delta > 0;
      card.delta.classList.add(improved ? "better" : "worse");
    }
  }

  return {
    root,
    update(response) {
      for (const [metricId, card] of cards) {
        card.current = response.predictions[metricId];
        card.value.textContent =
          `${formatValue(card.current)} ${response.units[metricId] ?? card.info.unit}`;
        renderDelta(card);
      }
    },
    updateCompare(response) {
      for (const [metricId, card] of cards) {
        card.other = response.predictions[metricId];
        renderDelta(card);
      }
    },
    clearCompare() {
      for (const card of cards.values()) {
        card.other = null;
        renderDelta(card);
      }
    },
    readValue(metricId) {
      return cards.get(metricId)?.value.textContent ?? "";
    },
    readDelta(metricId) {
      return cards.get(metricId)?.delta.textContent ?? "";
    },
  };
}
