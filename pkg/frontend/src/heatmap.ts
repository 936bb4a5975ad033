import type { ImportanceDoc } from "./types.js";

/**
 * Render the 10 x 9 feature-importance matrix as a shaded table.  Values are
 * already normalized per model column to [0, 1]; a cell at 1 renders at full
 * intensity, zeros stay unshaded.
 */
export function buildImportanceHeatmap(doc: ImportanceDoc): HTMLElement {
  const root = document.createElement("section");
  root.className = "importance-heatmap";
  const table = document.createElement("table");

  const header = document.createElement("tr");
  header.appendChild(document.createElement("th"));
  for (const metric of doc.metrics) {
    const cell = document.createElement("th");
    cell.textContent = metric.replace(/_/g, " ");
    header.appendChild(cell);
  }
  table.appendChild(header);

  doc.features.forEach((feature, i) => {
    const row = document.createElement("tr");
    const label = document.createElement("th");
    label.textContent = feature;
    row.appendChild(label);
    doc.values[i].forEach((value, j) => {
      const cell = document.createElement("td");
      const clamped = Math.min(1, Math.max(0, value));
      cell.dataset.value = String(value);
      cell.title = `${feature} / ${doc.metrics[j]}: ${value.toFixed(3)}`;
      cell.style.backgroundColor = `rgba(30, 100, 200, ${clamped.toFixed(3)})`;
      if (clamped > 0.6) cell.classList.add("intense");
      row.appendChild(cell);
    });
    table.appendChild(row);
  });

  root.appendChild(table);
  return root;
}
