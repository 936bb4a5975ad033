import type { FeatureDescriptor, NumericFeature, SchemaDoc, Spec } from "./types.js";

/** Resolution presets mirroring the synthetic fleet's four panel options. */
export const RESOLUTION_PRESETS: ReadonlyArray<[number, number]> = [
  [1366, 768],
  [1920, 1080],
  [2256, 1504],
  [2560, 1600],
];

function midValue(feature: NumericFeature): number {
  const mid = (feature.min + feature.max) / 2;
  return Math.round(mid / feature.step) * feature.step;
}

/** Mid-range defaults for every control, per the schema document. */
export function defaultSpec(schema: SchemaDoc): Spec {
  const spec: Spec = {};
  for (const feature of schema.features) {
    if (feature.kind === "categorical") {
      spec[feature.name] = feature.choices[0];
    } else {
      spec[feature.name] = midValue(feature);
    }
  }
  // coherent defaults where mid-range values would be odd
  spec.cpu_core_count = 4;
  spec.cpu_thread_count = 8;
  spec.ram_data_rate_gts = 3;
  spec.ram_capacity_gb = 8;
  const [w, h] = RESOLUTION_PRESETS[1];
  spec.display_horizontal_px = w;
  spec.display_vertical_px = h;
  spec.display_refresh_hz = 60;
  spec.cpu_base_freq_ghz = 2.0;
  return spec;
}

function clamp(feature: NumericFeature, value: number): number {
  if (Number.isNaN(value)) return feature.min;
  return Math.min(feature.max, Math.max(feature.min, value));
}

/**
 * Apply one edit, enforcing control bounds and thread/core consistency
 * (thread count never drops below core count).  Returns a new spec.
 */
export function applyEdit(schema: SchemaDoc, spec: Spec, name: string,
                          raw: string | number): Spec {
  const next: Spec = { ...spec };
  const feature = schema.features.find((f) => f.name === name);
  if (!feature) return next;
  if (feature.kind === "categorical") {
    if (feature.choices.includes(String(raw))) next[name] = String(raw);
    return next;
  }
  const value = clamp(feature, typeof raw === "number" ? raw : Number(raw));
  next[name] = value;
  const cores = Number(next.cpu_core_count);
  if (name === "cpu_core_count" && Number(next.cpu_thread_count) < cores) {
    next.cpu_thread_count = cores;
  }
  if (name === "cpu_thread_count" && value < cores) {
    next.cpu_thread_count = cores;
  }
  return next;
}

export interface SpecFormHandle {
  root: HTMLElement;
  getSpec(): Spec;
  setSpec(spec: Spec): void;
  highlightField(name: string | null): void;
}

function controlId(prefix: string, name: string): string {
  return `${prefix}-${name}`;
}

/**
 * Build the spec form: one control per schema feature, numeric steppers with
 * the schema's bounds, a vendor dropdown, a resolution preset picker with
 * free entry, and the refresh-rate control flagged as unused by the model.
 */
export function buildSpecForm(
  schema: SchemaDoc,
  initial: Spec,
  onChange: (spec: Spec) => void,
  prefix = "spec",
): SpecFormHandle {
  let spec: Spec = { ...initial };
  const root = document.createElement("form");
  root.className = "spec-form";
  root.addEventListener("submit", (event) => event.preventDefault());

  const inputs = new Map<string, HTMLInputElement | HTMLSelectElement>();

  const edit = (name: string, raw: string) => {
    spec = applyEdit(schema, spec, name, raw);
    syncInputs();
    onChange({ ...spec });
  };

  const addRow = (feature: FeatureDescriptor): void => {
    const row = document.createElement("label");
    row.className = "spec-row";
    row.htmlFor = controlId(prefix, feature.name);
    const caption = document.createElement("span");
    caption.textContent = feature.name;
    row.appendChild(caption);

    if (feature.kind === "categorical") {
      const select = document.createElement("select");
      select.id = controlId(prefix, feature.name);
      for (const choice of feature.choices) {
        const option = document.createElement("option");
        option.value = choice;
        option.textContent = choice;
        select.appendChild(option);
      }
      select.addEventListener("change", () => edit(feature.name, select.value));
      inputs.set(feature.name, select);
      row.appendChild(select);
    } else {
      const input = document.createElement("input");
      input.type = "number";
      input.id = controlId(prefix, feature.name);
      input.min = String(feature.min);
      input.max = String(feature.max);
      input.step = String(feature.step);
      input.addEventListener("input", () => edit(feature.name, input.value));
      inputs.set(feature.name, input);
      row.appendChild(input);
      if (feature.used_by_model === false) {
        const note = document.createElement("em");
        note.className = "inert-note";
        note.textContent = "not used by model";
        row.appendChild(note);
      }
    }
    root.appendChild(row);
  };

  for (const feature of schema.features) {
    addRow(feature);
    if (feature.name === "display_vertical_px") {
      root.appendChild(buildResolutionPicker());
    }
  }

  function buildResolutionPicker(): HTMLElement {
    const row = document.createElement("label");
    row.className = "spec-row";
    const caption = document.createElement("span");
    caption.textContent = "resolution preset";
    row.appendChild(caption);
    const select = document.createElement("select");
    select.id = controlId(prefix, "resolution-preset");
    const custom = document.createElement("option");
    custom.value = "custom";
    custom.textContent = "custom";
    select.appendChild(custom);
    for (const [w, h] of RESOLUTION_PRESETS) {
      const option = document.createElement("option");
      option.value = `${w}x${h}`;
      option.textContent = `${w} x ${h}`;
      select.appendChild(option);
    }
    select.addEventListener("change", () => {
      if (select.value === "custom") return;
      const [w, h] = select.value.split("x").map(Number);
      spec = applyEdit(schema, spec, "display_horizontal_px", w);
      spec = applyEdit(schema, spec, "display_vertical_px", h);
      syncInputs();
      onChange({ ...spec });
    });
    inputs.set("resolution-preset", select);
    row.appendChild(select);
    return row;
  }

  function syncInputs(): void {
    for (const [name, input] of inputs) {
      if (name === "resolution-preset") {
        const key = `${spec.display_horizontal_px}x${spec.display_vertical_px}`;
        const preset = RESOLUTION_PRESETS.some(([w, h]) => `${w}x${h}` === key);
        (input as HTMLSelectElement).value = preset ? key : "custom";
      } else {
        input.value = String(spec[name]);
      }
    }
  }

  syncInputs();
  return {
    root,
    getSpec: () => ({ ...spec }),
    setSpec: (next) => {
      spec = { ...next };
      syncInputs();
    },
    highlightField: (name) => {
      for (const [fieldName, input] of inputs) {
        input.classList.toggle("invalid", name !== null && fieldName === name);
      }
    },
  };
}
