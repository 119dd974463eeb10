/**
 * Composition walkthrough: stage checklist, the event under review,
 * a suggestion box, and the Accept / Regenerate controls. All state
 * shown here comes from the server session; the suggestion box and the
 * busy flag are the only client-side extras.
 */

import { currentEventText, stageStates } from './session';
import type { ViewSession } from './session';

export interface WalkthroughHandlers {
  onDraft: () => void;
  onAccept: () => void;
  onRegenerate: (suggestion: string) => void;
  onSuggestionInput: (text: string) => void;
}

export function renderWalkthrough(
  root: HTMLElement,
  view: ViewSession,
  handlers: WalkthroughHandlers,
): void {
  root.innerHTML = '';
  const { session, pattern, suggestion, busy } = view;

  const container = document.createElement('section');
  container.className = 'walkthrough';

  const heading = document.createElement('h2');
  heading.textContent = pattern.title;
  container.appendChild(heading);

  const premise = document.createElement('p');
  premise.className = 'premise';
  premise.textContent = session.premise;
  container.appendChild(premise);

  const checklist = document.createElement('ol');
  checklist.className = 'stage-checklist';
  for (const item of stageStates(session, pattern)) {
    const row = document.createElement('li');
    row.className = `stage-row stage-${item.mark}`;
    row.dataset.mark = item.mark;

    const name = document.createElement('span');
    name.className = 'stage-name';
    name.textContent = item.stage.name;
    row.appendChild(name);

    if (item.text !== null) {
      const text = document.createElement('p');
      text.className = 'stage-text';
      text.textContent = item.text;
      row.appendChild(text);
    }
    checklist.appendChild(row);
  }
  container.appendChild(checklist);

  const controls = document.createElement('div');
  controls.className = 'controls';

  if (session.status === 'drafting') {
    const draftBtn = document.createElement('button');
    draftBtn.type = 'button';
    draftBtn.className = 'draft-btn';
    draftBtn.textContent = busy ? 'Drafting…' : 'Draft next stage';
    draftBtn.disabled = busy;
    draftBtn.addEventListener('click', handlers.onDraft);
    controls.appendChild(draftBtn);
  }

  if (session.status === 'reviewing') {
    const review = document.createElement('div');
    review.className = 'review';

    const current = document.createElement('blockquote');
    current.className = 'current-event';
    current.textContent = currentEventText(session) ?? '';
    review.appendChild(current);

    const box = document.createElement('textarea');
    box.className = 'suggestion-box';
    box.placeholder = 'Suggestion for this stage (optional)';
    box.value = suggestion;
    box.addEventListener('input', () =>
      handlers.onSuggestionInput(box.value),
    );
    review.appendChild(box);

    const accept = document.createElement('button');
    accept.type = 'button';
    accept.className = 'accept-btn';
    accept.textContent = 'Accept';
    accept.disabled = busy;
    accept.addEventListener('click', handlers.onAccept);
    review.appendChild(accept);

    const regenerate = document.createElement('button');
    regenerate.type = 'button';
    regenerate.className = 'regenerate-btn';
    regenerate.textContent = 'Regenerate';
    regenerate.disabled = busy;
    regenerate.addEventListener('click', () =>
      handlers.onRegenerate(box.value),
    );
    review.appendChild(regenerate);

    controls.appendChild(review);
  }

  container.appendChild(controls);
  root.appendChild(container);
}
