/** Browser entry point: wires the pure modules to the DOM.
 *
 * Expects a page with #model-picker, #form-host, #timeline-host,
 * #story-host and a served workspace on the same origin.
 */

import { ApiError, WorkbenchApi } from "./api";
import {
  applyServerIssues,
  buildAnnotation,
  canSubmit,
  createFormViewModel,
  formToHtml,
  renderForm,
  setFieldValue,
  type FormViewModel,
} from "./form";
import { startStory, stepPanel, visitedTrail, walkStory, type StoryCursor } from "./story";
import { layoutTimeline, timelineToHtml } from "./timeline";
import type { ScenarioDoc, SegmentDoc } from "./types";

const api = new WorkbenchApi("");

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function banner(message: string, retry?: () => void): void {
  const host = el("banner-host");
  host.innerHTML = `<div class="banner">${message}${retry ? ' <button id="banner-retry">réessayer</button>' : ""}</div>`;
  if (retry) el("banner-retry").onclick = retry;
}

async function mountForm(modelId: string, timing: { stratumId: string; startMs: number; endMs: number }) {
  let vm: FormViewModel;
  try {
    const [schema, model] = await Promise.all([api.getForm(modelId), api.getModel(modelId)]);
    vm = createFormViewModel(schema, model);
  } catch (err) {
    banner(`chargement du formulaire impossible (${String(err)})`, () => void mountForm(modelId, timing));
    return;
  }

  const host = el("form-host");
  const redraw = () => {
    host.innerHTML = formToHtml(renderForm(vm));
    host.querySelectorAll("select, input").forEach((node, index) => {
      node.addEventListener("change", (event) => {
        const value = (event.target as HTMLInputElement | HTMLSelectElement).value || null;
        vm = setFieldValue(vm, index, value);
        redraw();
      });
    });
    const form = host.querySelector("form");
    form?.addEventListener("submit", (event) => {
      event.preventDefault();
      if (canSubmit(vm)) void submit();
    });
  };

  const submit = async () => {
    const segment: Omit<SegmentDoc, "version"> = {
      id: `seg_${timing.stratumId}_${timing.startMs}`,
      stratum_id: timing.stratumId,
      start_ms: timing.startMs,
      end_ms: timing.endMs,
      model_id: modelId,
      annotation: buildAnnotation(vm),
    };
    try {
      await api.postSegment(segment);
      await refreshTimeline();
    } catch (err) {
      if (err instanceof ApiError && err.status === 400) {
        const issues = (err.body.details as { issues?: [] }).issues ?? [];
        vm = applyServerIssues(vm, issues);
        redraw();
      } else if (err instanceof ApiError && err.status === 409) {
        banner("le segment a changé entre-temps : rechargez puis fusionnez vos valeurs", () =>
          void mountForm(modelId, timing),
        );
      } else {
        banner(String(err));
      }
    }
  };

  redraw();
}

async function refreshTimeline(): Promise<void> {
  const corpus = await api.getCorpus();
  const media = corpus.media[0];
  if (!media) return;
  const layout = layoutTimeline(media.id, media.duration_ms, corpus.strata, corpus.segments, 960);
  el("timeline-host").innerHTML = timelineToHtml(layout);
}

async function mountStory(scenarioId: string): Promise<void> {
  let scenario: ScenarioDoc;
  try {
    scenario = await api.getScenario(scenarioId);
  } catch (err) {
    banner(`scénario indisponible (${String(err)})`, () => void mountStory(scenarioId));
    return;
  }
  const { manifest } = await api.publish(scenarioId, "open");
  let cursor: StoryCursor = startStory(scenario);

  const host = el("story-host");
  const redraw = () => {
    const panel = stepPanel(manifest, cursor);
    const segments = panel.matches
      .map((m) => `<li>${m.segment_id} (score ${m.match_score}, [${m.start_ms}, ${m.end_ms}) ms)</li>`)
      .join("");
    const links = panel.links
      .map((l) => `<li><a href="${l.external_ref}">${l.scheme}</a></li>`)
      .join("");
    const choices = cursor.availableTransitions
      .map((c, i) => {
        const reason = c.enabled ? "" : ` (requiert : ${c.unmetConditions.join(", ")})`;
        return `<button data-choice="${i}" ${c.enabled ? "" : "disabled"}>${c.toLabel}${reason}</button>`;
      })
      .join("");
    const trail = cursor.atFinal
      ? `<p class="trail">Parcours : ${visitedTrail(scenario, cursor).join(" → ")}</p>`
      : "";
    host.innerHTML = `<h2>${panel.label}</h2><ul>${segments}</ul><ul class="links">${links}</ul>${choices}${trail}`;
    host.querySelectorAll("button[data-choice]").forEach((node) => {
      node.addEventListener("click", () => {
        const choice = cursor.availableTransitions[Number((node as HTMLElement).dataset.choice)];
        if (choice?.enabled) {
          cursor = walkStory(scenario, cursor, choice);
          redraw();
        }
      });
    });
  };
  redraw();
}

async function boot(): Promise<void> {
  const models = await api.getModels();
  const picker = el("model-picker") as unknown as HTMLSelectElement;
  picker.innerHTML = models
    .map((m) => `<option value="${m.id ?? ""}">${m.label ?? m.id ?? ""}</option>`)
    .join("");
  picker.addEventListener("change", () => {
    void mountForm(picker.value, { stratumId: "st_fosse_thematique", startMs: 0, endMs: 1000 });
  });
  await refreshTimeline();
  const scenarios = await api.getScenarios();
  if (scenarios[0]) await mountStory(scenarios[0].id);
}

if (typeof document !== "undefined") {
  void boot().catch((err) => banner(String(err)));
}
