/** Dynamic annotation forms derived from a model's served schema.
 *
 * The view model mirrors the server schema exactly (same field order, same
 * value options). Client-side gating is deliberately a subset of what the
 * server enforces: completeness (every field bound) and vocabulary
 * membership. Projection checking stays on the server; a submission the
 * client enables is one the server will accept.
 */

import type {
  FormFieldDoc,
  FormSchemaDoc,
  GraphDoc,
  IssueDoc,
  ModelDoc,
} from "./types";

export interface FieldState {
  field: FormFieldDoc;
  /** far endpoint of the model edge this field instantiates */
  farNodeId: string;
  value: string | null;
  dirty: boolean;
  error: string | null;
}

export interface FormViewModel {
  modelId: string;
  headNodeId: string;
  model: ModelDoc;
  fields: FieldState[];
  formError: string | null;
}

/** Far node of each head-incident model edge, in schema (edge) order. */
export function headFieldTargets(model: ModelDoc): string[] {
  const targets: string[] = [];
  for (const edge of model.graph.edges) {
    if (edge.source === model.head_node) {
      targets.push(edge.target);
    } else if (edge.target === model.head_node) {
      targets.push(edge.source);
    }
  }
  return targets;
}

export function createFormViewModel(schema: FormSchemaDoc, model: ModelDoc): FormViewModel {
  const targets = headFieldTargets(model);
  if (targets.length !== schema.fields.length) {
    throw new Error(
      `schema/model mismatch: ${schema.fields.length} fields vs ${targets.length} head edges`,
    );
  }
  return {
    modelId: schema.model_id,
    headNodeId: model.head_node,
    model,
    fields: schema.fields.map((field, i) => ({
      field,
      farNodeId: targets[i]!,
      value: null,
      dirty: false,
      error: null,
    })),
    formError: null,
  };
}

export function setFieldValue(vm: FormViewModel, index: number, value: string | null): FormViewModel {
  const fields = vm.fields.map((f, i) =>
    i === index ? { ...f, value, dirty: true, error: validateField(f.field, value) } : f,
  );
  return { ...vm, fields, formError: null };
}

/** Vocabulary check for one field; null means locally acceptable. */
export function validateField(field: FormFieldDoc, value: string | null): string | null {
  if (value === null || value === "") {
    return null; // emptiness is reported at form level, not per field
  }
  if (field.value_domain !== "free" && !field.value_domain.includes(value)) {
    return `« ${value} » n'appartient pas au vocabulaire de ${field.relation_label}`;
  }
  return null;
}

export function isComplete(vm: FormViewModel): boolean {
  return vm.fields.every((f) => f.value !== null && f.value !== "");
}

export function vocabularyOk(vm: FormViewModel): boolean {
  return vm.fields.every((f) => validateField(f.field, f.value) === null);
}

/** The submit gate: never enable a submission the server would reject. */
export function canSubmit(vm: FormViewModel): boolean {
  return vm.fields.length > 0 && isComplete(vm) && vocabularyOk(vm);
}

/** Instantiate the model graph, binding each filled field's marker on the
 * far node of its head edge. Unbound fields keep the model's generic node,
 * and non-form parts of the model survive untouched, so the server-side
 * projection of the model into the result always exists. */
export function buildAnnotation(vm: FormViewModel): GraphDoc {
  const markers = new Map<string, string>();
  for (const f of vm.fields) {
    if (f.value) {
      markers.set(f.farNodeId, f.value);
    }
  }
  return {
    nodes: vm.model.graph.nodes.map((n) => {
      const marker = markers.get(n.node_id);
      return marker
        ? { node_id: n.node_id, type_id: n.type_id, referent: { kind: "marker" as const, value: marker } }
        : n;
    }),
    edges: vm.model.graph.edges,
  };
}

/** Attach a 400 report to the fields it concerns; the rest goes form-level. */
export function applyServerIssues(vm: FormViewModel, issues: IssueDoc[]): FormViewModel {
  const byNode = new Map<string, string[]>();
  const formLevel: string[] = [];
  for (const issue of issues) {
    const node = issue.where.startsWith("node ") ? issue.where.slice(5) : null;
    if (node) {
      const bucket = byNode.get(node) ?? [];
      bucket.push(`${issue.code}: ${issue.message}`);
      byNode.set(node, bucket);
    } else {
      formLevel.push(`${issue.code}: ${issue.message}`);
    }
  }
  return {
    ...vm,
    fields: vm.fields.map((f) => {
      const hits = byNode.get(f.farNodeId);
      return hits ? { ...f, error: hits.join("; ") } : f;
    }),
    formError: formLevel.length ? formLevel.join("; ") : null,
  };
}

// --- rendering (pure: schema state in, control tree / HTML out) -------------

export interface SelectControl {
  kind: "select";
  name: string;
  label: string;
  options: string[];
  value: string | null;
  required: boolean;
  error: string | null;
}

export interface TextControl {
  kind: "text";
  name: string;
  label: string;
  value: string | null;
  required: boolean;
  error: string | null;
}

export type Control = SelectControl | TextControl;

export interface RenderedForm {
  modelId: string;
  controls: Control[];
  submitEnabled: boolean;
}

export function renderForm(vm: FormViewModel): RenderedForm {
  return {
    modelId: vm.modelId,
    controls: vm.fields.map((f) => {
      const base = {
        name: f.field.relation_id,
        label: f.field.relation_label,
        value: f.value,
        required: f.field.required,
        error: f.error,
      };
      return f.field.value_domain === "free"
        ? { kind: "text" as const, ...base }
        : { kind: "select" as const, options: [...f.field.value_domain], ...base };
    }),
    submitEnabled: canSubmit(vm),
  };
}

const escapeHtml = (s: string): string =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");

/** Static HTML for one rendered form; searchable selects degrade to plain
 * <select> plus a datalist-backed filter input in the live DOM layer. */
export function formToHtml(form: RenderedForm): string {
  const rows = form.controls.map((c) => {
    const req = c.required ? ' <span class="required">*</span>' : "";
    const err = c.error ? `\n    <p class="error">${escapeHtml(c.error)}</p>` : "";
    if (c.kind === "select") {
      const options = [
        `<option value=""${c.value === null ? " selected" : ""}></option>`,
        ...c.options.map(
          (o) => `<option value="${escapeHtml(o)}"${o === c.value ? " selected" : ""}>${escapeHtml(o)}</option>`,
        ),
      ].join("\n      ");
      return `  <label>${escapeHtml(c.label)}${req}
    <select name="${escapeHtml(c.name)}" data-searchable="true">
      ${options}
    </select>${err}
  </label>`;
    }
    const value = c.value ? ` value="${escapeHtml(c.value)}"` : "";
    return `  <label>${escapeHtml(c.label)}${req}
    <input type="text" name="${escapeHtml(c.name)}"${value}>${err}
  </label>`;
  });
  return `<form class="annotation-form" data-model="${escapeHtml(form.modelId)}">
${rows.join("\n")}
  <button type="submit"${form.submitEnabled ? "" : " disabled"}>Enregistrer</button>
</form>`;
}
