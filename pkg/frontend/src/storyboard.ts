/**
 * Storyboard view: one panel per event with the stage name, the image
 * or a placeholder tile, the event text, and a reveal toggle for the
 * image prompt. Export buttons pass the backend's bytes through.
 */

import type { StoryboardDocument } from './types';

export interface StoryboardHandlers {
  onExport: (format: 'html' | 'markdown' | 'json') => void;
}

export function renderStoryboard(
  root: HTMLElement,
  document_: StoryboardDocument,
  handlers: StoryboardHandlers,
): void {
  root.innerHTML = '';
  const container = document.createElement('section');
  container.className = 'storyboard';

  const heading = document.createElement('h2');
  heading.textContent = document_.title;
  container.appendChild(heading);

  const premise = document.createElement('p');
  premise.className = 'premise';
  premise.textContent = document_.premise;
  container.appendChild(premise);

  const grid = document.createElement('div');
  grid.className = 'panel-grid';

  document_.panels.forEach((panel, i) => {
    const figure = document.createElement('figure');
    figure.className = 'panel';
    figure.dataset.index = String(i + 1);

    const name = document.createElement('figcaption');
    name.className = 'panel-stage';
    name.textContent = `${i + 1}. ${panel.stage_name}`;
    figure.appendChild(name);

    if (panel.image_ref) {
      const img = document.createElement('img');
      img.src = panel.image_ref;
      img.alt = panel.stage_name;
      figure.appendChild(img);
    } else {
      const placeholder = document.createElement('div');
      placeholder.className = 'panel-placeholder';
      placeholder.textContent = 'no image';
      figure.appendChild(placeholder);
    }

    const text = document.createElement('p');
    text.className = 'panel-text';
    text.textContent = panel.event_text;
    figure.appendChild(text);

    const prompt = document.createElement('p');
    prompt.className = 'panel-prompt';
    prompt.textContent = panel.image_prompt;
    prompt.hidden = true;
    figure.appendChild(prompt);

    const toggle = document.createElement('button');
    toggle.type = 'button';
    toggle.className = 'prompt-toggle';
    toggle.textContent = 'Show image prompt';
    toggle.addEventListener('click', () => {
      prompt.hidden = !prompt.hidden;
      toggle.textContent = prompt.hidden
        ? 'Show image prompt'
        : 'Hide image prompt';
    });
    figure.appendChild(toggle);

    grid.appendChild(figure);
  });
  container.appendChild(grid);

  const summary = document.createElement('p');
  summary.className = 'summary';
  summary.textContent = document_.summary;
  container.appendChild(summary);

  const exports = document.createElement('div');
  exports.className = 'export-bar';
  for (const format of ['html', 'markdown', 'json'] as const) {
    const btn = document.createElement('button');
    btn.type = 'button';
    btn.className = `export-${format}`;
    btn.textContent = `Export ${format}`;
    btn.addEventListener('click', () => handlers.onExport(format));
    exports.appendChild(btn);
  }
  container.appendChild(exports);

  root.appendChild(container);
}
