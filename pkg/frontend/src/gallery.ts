/**
 * Pattern gallery: every known pattern as a card, grouped by genre,
 * with a stage-count badge. Selecting a card hands the pattern to the
 * caller, who opens premise entry.
 */

import type { Pattern } from './types';

export interface GalleryHandlers {
  onSelect: (pattern: Pattern) => void;
}

function groupByGenre(patterns: Pattern[]): Map<string, Pattern[]> {
  const groups = new Map<string, Pattern[]>();
  for (const pattern of patterns) {
    const bucket = groups.get(pattern.genre);
    if (bucket) {
      bucket.push(pattern);
    } else {
      groups.set(pattern.genre, [pattern]);
    }
  }
  return groups;
}

export function renderGallery(
  root: HTMLElement,
  patterns: Pattern[],
  handlers: GalleryHandlers,
): void {
  root.innerHTML = '';
  const gallery = document.createElement('section');
  gallery.className = 'gallery';

  const heading = document.createElement('h2');
  heading.textContent = 'Choose a pattern';
  gallery.appendChild(heading);

  for (const [genre, members] of groupByGenre(patterns)) {
    const group = document.createElement('div');
    group.className = 'gallery-group';
    group.dataset.genre = genre;

    const label = document.createElement('h3');
    label.textContent = genre;
    group.appendChild(label);

    for (const pattern of members) {
      const card = document.createElement('button');
      card.type = 'button';
      card.className = 'pattern-card';
      card.dataset.patternId = pattern.id;

      const title = document.createElement('span');
      title.className = 'pattern-card-title';
      title.textContent = pattern.title;

      const badge = document.createElement('span');
      badge.className = 'stage-badge';
      badge.textContent = `${pattern.stages.length} stages`;

      card.appendChild(title);
      card.appendChild(badge);
      card.addEventListener('click', () => handlers.onSelect(pattern));
      group.appendChild(card);
    }
    gallery.appendChild(group);
  }
  root.appendChild(gallery);
}

export function renderErrorBanner(root: HTMLElement, message: string): void {
  root.innerHTML = '';
  const banner = document.createElement('div');
  banner.className = 'error-banner';
  banner.setAttribute('role', 'alert');
  banner.textContent = message;
  const retry = document.createElement('p');
  retry.textContent = 'Check that the service is running, then reload.';
  root.appendChild(banner);
  root.appendChild(retry);
}
