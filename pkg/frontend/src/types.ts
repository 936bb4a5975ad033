/** Wire types for the prediction service endpoints. */

export interface NumericFeature {
  name: string;
  kind: "numeric";
  min: number;
  max: number;
  step: number;
  used_by_model?: boolean;
}

export interface CategoricalFeature {
  name: string;
  kind: "categorical";
  choices: string[];
}

export type FeatureDescriptor = NumericFeature | CategoricalFeature;

export interface MetricInfo {
  id: string;
  group: "latency" | "responsiveness" | "smoothness";
  unit: string;
  direction: "lower" | "higher";
  description: string;
}

export interface SchemaDoc {
  features: FeatureDescriptor[];
  vendors: string[];
  metrics: MetricInfo[];
}

/** The nine input fields, keyed by schema feature name. */
export type Spec = Record<string, number | string>;

export interface PredictionResponse {
  predictions: Record<string, number>;
  units: Record<string, string>;
  bundle_version: string;
  spec: Spec;
}

export interface ImportanceDoc {
  features: string[];
  metrics: string[];
  values: number[][];
}

export interface FieldErrorBody {
  error: string;
  field?: string;
}
