import { FieldError, PredictionScheduler, fetchImportance, fetchSchema, postPredict } from "./api.js";
import { buildSpecForm, defaultSpec } from "./form.js";
import { buildImportanceHeatmap } from "./heatmap.js";
import { buildMetricPanel } from "./panel.js";
import type { PredictionResponse, SchemaDoc, Spec } from "./types.js";

export interface AppDeps {
  schema?: () => Promise<SchemaDoc>;
  predict?: (spec: Spec) => Promise<PredictionResponse>;
  importance?: typeof fetchImportance;
  debounceMs?: number;
}

export interface AppHandle {
  schedulerA: PredictionScheduler;
  schedulerB: PredictionScheduler;
}

/**
 * Boot the explorer into `mount`: load the schema, build the form and the
 * nine-card panel, wire debounced live predictions, the A/B compare mode,
 * and the importance tab (hidden when the service has no matrix).
 */
export async function startApp(mount: HTMLElement, deps: AppDeps = {}): Promise<AppHandle> {
  const loadSchema = deps.schema ?? fetchSchema;
  const predict = deps.predict ?? postPredict;
  const loadImportance = deps.importance ?? fetchImportance;
  const debounceMs = deps.debounceMs ?? 250;

  mount.textContent = "";
  let schema: SchemaDoc;
  try {
    schema = await loadSchema();
  } catch (error) {
    const banner = document.createElement("div");
    banner.className = "error-banner";
    banner.textContent = `Prediction service unreachable: ${error}`;
    const retry = document.createElement("button");
    retry.textContent = "Retry";
    retry.addEventListener("click", () => void startApp(mount, deps));
    banner.appendChild(retry);
    mount.appendChild(banner);
    throw error;
  }

  const header = document.createElement("header");
  const title = document.createElement("h1");
  title.textContent = "uxcast what-if explorer";
  header.appendChild(title);
  const status = document.createElement("p");
  status.className = "status-line";
  header.appendChild(status);
  mount.appendChild(header);

  const layout = document.createElement("div");
  layout.className = "layout";
  mount.appendChild(layout);

  const formsColumn = document.createElement("div");
  formsColumn.className = "forms-column";
  layout.appendChild(formsColumn);

  const panel = buildMetricPanel(schema.metrics);
  const schedulerA = new PredictionScheduler(predict, debounceMs);
  const schedulerB = new PredictionScheduler(predict, debounceMs);

  const applyA = (response: PredictionResponse) => {
    panel.update(response);
    status.textContent = `bundle ${response.bundle_version}`;
    formA.highlightField(null);
  };
  const onErrorA = (error: unknown) => {
    if (error instanceof FieldError) formA.highlightField(error.field);
    else status.textContent = String(error);
  };

  const formA = buildSpecForm(schema, defaultSpec(schema), (spec) => {
    schedulerA.schedule(spec, applyA, onErrorA);
  }, "a");
  const formABox = document.createElement("section");
  formABox.className = "form-box";
  const formATitle = document.createElement("h2");
  formATitle.textContent = "candidate A";
  formABox.append(formATitle, formA.root);
  formsColumn.appendChild(formABox);

  // compare mode: a second form whose predictions render as per-card deltas
  const compareToggle = document.createElement("button");
  compareToggle.id = "compare-toggle";
  compareToggle.textContent = "Compare with candidate B";
  formsColumn.appendChild(compareToggle);

  const formBBox = document.createElement("section");
  formBBox.className = "form-box hidden";
  const formBTitle = document.createElement("h2");
  formBTitle.textContent = "candidate B";
  formBBox.appendChild(formBTitle);
  formsColumn.appendChild(formBBox);

  const applyB = (response: PredictionResponse) => {
    panel.updateCompare(response);
    formB.highlightField(null);
  };
  const onErrorB = (error: unknown) => {
    if (error instanceof FieldError) formB.highlightField(error.field);
    else status.textContent = String(error);
  };
  const formB = buildSpecForm(schema, defaultSpec(schema), (spec) => {
    schedulerB.schedule(spec, applyB, onErrorB);
  }, "b");
  formBBox.appendChild(formB.root);

  let comparing = false;
  compareToggle.addEventListener("click", () => {
    comparing = !comparing;
    formBBox.classList.toggle("hidden", !comparing);
    compareToggle.textContent = comparing
      ? "Hide candidate B" : "Compare with candidate B";
    if (comparing) {
      formB.setSpec(formA.getSpec());
      schedulerB.schedule(formB.getSpec(), applyB, onErrorB);
    } else {
      panel.clearCompare();
    }
  });

  layout.appendChild(panel.root);

  const importance = await loadImportance();
  if (importance !== null) {
    const tab = document.createElement("details");
    tab.id = "importance-tab";
    const summary = document.createElement("summary");
    summary.textContent = "feature importance";
    tab.append(summary, buildImportanceHeatmap(importance));
    mount.appendChild(tab);
  }

  schedulerA.schedule(formA.getSpec(), applyA, onErrorA);
  return { schedulerA, schedulerB };
}
