/** Thin typed client over the workspace HTTP API; every domain action goes
 * through here (the workbench keeps no domain data of its own). */

import type {
  ApiErrorBody,
  CorpusDoc,
  FormSchemaDoc,
  GraphDoc,
  ManifestDoc,
  ModelDoc,
  ScenarioDoc,
  SegmentDoc,
  ValidateResponse,
} from "./types";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: ApiErrorBody,
  ) {
    super(`${body.code}: ${body.message}`);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, {
    headers: { "content-type": "application/json" },
    ...init,
  });
  if (!response.ok) {
    let body: ApiErrorBody;
    try {
      body = (await response.json()) as ApiErrorBody;
    } catch {
      body = { code: "Http", message: response.statusText, details: {} };
    }
    throw new ApiError(response.status, body);
  }
  return (await response.json()) as T;
}

export class WorkbenchApi {
  constructor(private readonly base: string = "") {}

  getOntology(): Promise<unknown> {
    return request(`${this.base}/api/ontology`);
  }

  getModels(): Promise<ModelDoc[]> {
    return request(`${this.base}/api/models`);
  }

  getModel(modelId: string): Promise<ModelDoc> {
    return request(`${this.base}/api/models/${encodeURIComponent(modelId)}`);
  }

  getForm(modelId: string): Promise<FormSchemaDoc> {
    return request(`${this.base}/api/models/${encodeURIComponent(modelId)}/form`);
  }

  getCorpus(corpusId = "main"): Promise<CorpusDoc> {
    return request(`${this.base}/api/corpora/${encodeURIComponent(corpusId)}`);
  }

  validate(modelId: string, annotation: GraphDoc): Promise<ValidateResponse> {
    return request(`${this.base}/api/validate`, {
      method: "POST",
      body: JSON.stringify({ model_id: modelId, annotation }),
    });
  }

  postSegment(doc: Omit<SegmentDoc, "version">, corpusId = "main"): Promise<SegmentDoc> {
    return request(`${this.base}/api/corpora/${encodeURIComponent(corpusId)}/segments`, {
      method: "POST",
      body: JSON.stringify(doc),
    });
  }

  putSegment(doc: SegmentDoc, corpusId = "main"): Promise<SegmentDoc> {
    return request(
      `${this.base}/api/corpora/${encodeURIComponent(corpusId)}/segments/${encodeURIComponent(doc.id)}`,
      { method: "PUT", body: JSON.stringify(doc) },
    );
  }

  getSegmentsAt(mediaId: string, tMs: number): Promise<Record<string, SegmentDoc[]>> {
    return request(`${this.base}/api/media/${encodeURIComponent(mediaId)}/at/${tMs}`);
  }

  getScenarios(): Promise<ScenarioDoc[]> {
    return request(`${this.base}/api/scenarios`);
  }

  getScenario(scenarioId: string): Promise<ScenarioDoc> {
    return request(`${this.base}/api/scenarios/${encodeURIComponent(scenarioId)}`);
  }

  getPublication(publicationId: string): Promise<ManifestDoc> {
    return request(`${this.base}/api/publications/${encodeURIComponent(publicationId)}`);
  }

  publish(scenarioId: string, mode: "fixed" | "open"): Promise<{ manifest: ManifestDoc }> {
    return request(`${this.base}/api/scenarios/${encodeURIComponent(scenarioId)}/publish`, {
      method: "POST",
      body: JSON.stringify({ mode }),
    });
  }
}
