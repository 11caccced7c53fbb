/** Story walking: a cursor over a scenario's step graph, steered by the
 * reader, showing each step's matched segments and intertextual links from
 * the compiled publication manifest. Condition semantics mirror the server:
 * a transition is available once every step it names has been visited. */

import type { ManifestDoc, ScenarioDoc, StepBindingDoc, TransitionDoc } from "./types";

export interface TransitionChoice {
  transition: TransitionDoc;
  toLabel: string;
  enabled: boolean;
  unmetConditions: string[];
}

export interface StoryCursor {
  scenarioId: string;
  visited: string[];
  current: string;
  availableTransitions: TransitionChoice[];
  atFinal: boolean;
}

export interface StepPanel {
  stepId: string;
  label: string;
  matches: StepBindingDoc["matches"];
  links: StepBindingDoc["links"];
}

function labelOf(scenario: ScenarioDoc, stepId: string): string {
  return scenario.steps.find((s) => s.id === stepId)?.label ?? stepId;
}

function choicesFrom(scenario: ScenarioDoc, current: string, visited: string[]): TransitionChoice[] {
  const seen = new Set(visited);
  return scenario.transitions
    .filter((t) => t.from === current)
    .map((t) => {
      const unmet = t.condition.filter((c) => !seen.has(c)).sort();
      return {
        transition: t,
        toLabel: labelOf(scenario, t.to),
        enabled: unmet.length === 0,
        unmetConditions: unmet,
      };
    });
}

export function startStory(scenario: ScenarioDoc): StoryCursor {
  const visited = [scenario.start_id];
  return {
    scenarioId: scenario.id,
    visited,
    current: scenario.start_id,
    availableTransitions: choicesFrom(scenario, scenario.start_id, visited),
    atFinal: scenario.final_ids.includes(scenario.start_id),
  };
}

/** Advance along one enabled choice; refuses disabled or foreign choices. */
export function walkStory(
  scenario: ScenarioDoc,
  cursor: StoryCursor,
  choice: TransitionChoice,
): StoryCursor {
  const offered = cursor.availableTransitions.find(
    (c) => c.transition.from === choice.transition.from && c.transition.to === choice.transition.to,
  );
  if (!offered || !offered.enabled) {
    throw new Error(`transition ${choice.transition.from} -> ${choice.transition.to} is not available`);
  }
  const visited = [...cursor.visited, choice.transition.to];
  return {
    scenarioId: cursor.scenarioId,
    visited,
    current: choice.transition.to,
    availableTransitions: choicesFrom(scenario, choice.transition.to, visited),
    atFinal: scenario.final_ids.includes(choice.transition.to),
  };
}

/** What the reader sees at the current step: segments in score order plus
 * the step's intertextual links, straight from the manifest. */
export function stepPanel(manifest: ManifestDoc, cursor: StoryCursor): StepPanel {
  const binding = manifest.steps.find((b) => b.step_id === cursor.current);
  if (!binding) {
    throw new Error(`manifest for ${manifest.scenario_id} has no step ${cursor.current}`);
  }
  return {
    stepId: binding.step_id,
    label: binding.label,
    matches: binding.matches,
    links: binding.links,
  };
}

/** The completed trail, rendered once a final step is reached. */
export function visitedTrail(scenario: ScenarioDoc, cursor: StoryCursor): string[] {
  return cursor.visited.map((id) => labelOf(scenario, id));
}

/** A stale manifest (scenario changed since compilation) should surface a
 * re-fetch banner rather than a broken panel. */
export function manifestMatchesScenario(manifest: ManifestDoc, scenario: ScenarioDoc): boolean {
  if (manifest.scenario_id !== scenario.id) {
    return false;
  }
  const bound = new Set(manifest.steps.map((b) => b.step_id));
  return scenario.steps.every((s) => bound.has(s.id));
}
