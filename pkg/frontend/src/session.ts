/**
 * View-side assembly of a composition session: the server session, its
 * pattern, and the transient bits the server does not own (the pending
 * suggestion text and the in-flight flag).
 */

import type { Pattern, Session, Stage } from './types';

export interface ViewSession {
  session: Session;
  pattern: Pattern;
  suggestion: string;
  busy: boolean;
}

export type StageMark = 'done' | 'active' | 'pending';

export interface StageState {
  stage: Stage;
  mark: StageMark;
  text: string | null;
}

/**
 * One row per pattern stage. While drafting or reviewing exactly one
 * stage is active (the cursor); completed sessions have none.
 */
export function stageStates(session: Session, pattern: Pattern): StageState[] {
  return pattern.stages.map((stage, i) => {
    const position = i + 1;
    const event = session.events[i];
    let mark: StageMark;
    if (session.status === 'complete') {
      mark = 'done';
    } else if (position < session.cursor) {
      mark = 'done';
    } else if (position === session.cursor) {
      mark = 'active';
    } else {
      mark = 'pending';
    }
    return { stage, mark, text: event ? event.text : null };
  });
}

export function activeStage(session: Session, pattern: Pattern): Stage | null {
  if (session.status === 'complete') return null;
  return pattern.stages[session.cursor - 1] ?? null;
}

export function currentEventText(session: Session): string | null {
  if (session.status !== 'reviewing') return null;
  const event = session.events[session.events.length - 1];
  return event ? event.text : null;
}
