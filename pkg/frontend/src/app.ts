/**
 * Screen orchestration. The server is the only authority: every screen
 * is drawn from fetched state, mutations go through the client, and a
 * conflict answer (409) resolves by re-fetching the session.
 */

import { ApiError, Client } from './api';
import { renderErrorBanner, renderGallery } from './gallery';
import { renderStoryboard } from './storyboard';
import { renderWalkthrough } from './walkthrough';
import { showToast } from './toast';
import { Store } from './store';
import type { ViewSession } from './session';
import type { Pattern, StoryboardDocument } from './types';

export type Screen =
  | 'loading'
  | 'gallery'
  | 'premise'
  | 'walkthrough'
  | 'storyboard'
  | 'error';

export interface ExportResult {
  format: string;
  content: string;
  contentType: string;
}

interface AppState {
  screen: Screen;
  patterns: Pattern[];
  chosen: Pattern | null;
  view: ViewSession | null;
  board: StoryboardDocument | null;
  storyId: string;
  error: string;
}

export interface AppOptions {
  onNavigate?: (screen: Screen) => void;
}

export class App {
  readonly state: Store<AppState>;
  /** Last export payload, kept for download handling and inspection. */
  lastExport: ExportResult | null = null;

  private readonly client: Client;
  private readonly root: HTMLElement;
  /* screens render here; toasts live next to it and survive re-renders */
  private readonly screen: HTMLElement;
  private readonly options: AppOptions;

  constructor(client: Client, root: HTMLElement, options: AppOptions = {}) {
    this.client = client;
    this.root = root;
    this.screen = document.createElement('div');
    this.screen.className = 'screen';
    root.appendChild(this.screen);
    this.options = options;
    this.state = new Store<AppState>({
      screen: 'loading',
      patterns: [],
      chosen: null,
      view: null,
      board: null,
      storyId: '',
      error: '',
    });
    this.state.subscribe(() => this.render());
  }

  async start(): Promise<void> {
    try {
      const patterns = await this.client.listPatterns();
      this.state.set({ screen: 'gallery', patterns });
    } catch (err) {
      this.state.set({
        screen: 'error',
        error: `Could not reach the composition service: ${String(
          err instanceof Error ? err.message : err,
        )}`,
      });
    }
  }

  selectPattern(pattern: Pattern): void {
    this.state.set({ screen: 'premise', chosen: pattern });
  }

  async beginComposition(premise: string): Promise<void> {
    const chosen = this.state.get().chosen;
    if (!chosen) return;
    try {
      const session = await this.client.createSession(premise, chosen.id);
      this.state.set({
        screen: 'walkthrough',
        view: { session, pattern: chosen, suggestion: '', busy: false },
      });
    } catch (err) {
      this.surface(err);
    }
  }

  /** Rebuild the walkthrough from GET endpoints alone. */
  async openSession(sessionId: string): Promise<void> {
    try {
      const session = await this.client.getSession(sessionId);
      const pattern = await this.client.getPattern(session.pattern_id);
      if (session.status === 'complete' && session.story_id) {
        await this.openStoryboard(session.story_id);
        return;
      }
      this.state.set({
        screen: 'walkthrough',
        view: { session, pattern, suggestion: '', busy: false },
      });
    } catch (err) {
      this.surface(err);
    }
  }

  async openStoryboard(storyId: string): Promise<void> {
    try {
      const board = await this.client.getStoryboard(storyId);
      this.state.set({ screen: 'storyboard', board, storyId });
    } catch (err) {
      this.surface(err);
    }
  }

  draftNext(): Promise<void> {
    return this.mutate((view) => this.client.draft(view.session.id));
  }

  acceptCurrent(): Promise<void> {
    return this.mutate((view) => this.client.accept(view.session.id));
  }

  regenerateCurrent(suggestion: string): Promise<void> {
    return this.mutate((view) =>
      this.client.regenerate(
        view.session.id,
        suggestion.trim() ? suggestion : undefined,
      ),
    );
  }

  setSuggestion(text: string): void {
    const view = this.state.get().view;
    if (!view) return;
    // no re-render on keystrokes; the box already shows the text
    view.suggestion = text;
  }

  async exportStory(format: 'html' | 'markdown' | 'json'): Promise<void> {
    const { board, storyId } = this.state.get();
    if (!board || !storyId) return;
    try {
      const exported = await this.client.exportStory(storyId, format);
      this.lastExport = { format, ...exported };
      this.offerDownload(storyId, format, exported);
    } catch (err) {
      this.surface(err);
    }
  }

  /**
   * One mutation at a time per session: the busy flag disables the
   * buttons while a request is in flight. The server still arbitrates
   * real conflicts with 409, which resolves by re-fetching.
   */
  private async mutate(
    operation: (view: ViewSession) => Promise<ViewSession['session']>,
  ): Promise<void> {
    const view = this.state.get().view;
    if (!view || view.busy) return;
    this.state.set({ view: { ...view, busy: true } });
    try {
      const session = await operation(view);
      this.state.set({
        view: { session, pattern: view.pattern, suggestion: '', busy: false },
      });
      if (session.status === 'complete' && session.story_id) {
        await this.openStoryboard(session.story_id);
      }
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        showToast(this.root, `Out of step with the server: ${err.message}`);
        const fresh = await this.client.getSession(view.session.id);
        this.state.set({
          view: {
            session: fresh,
            pattern: view.pattern,
            suggestion: view.suggestion,
            busy: false,
          },
        });
        return;
      }
      this.state.set({ view: { ...view, busy: false } });
      this.surface(err);
    }
  }

  private surface(err: unknown): void {
    const message =
      err instanceof ApiError
        ? `${err.code}: ${err.message}`
        : String(err instanceof Error ? err.message : err);
    showToast(this.root, message);
  }

  private offerDownload(
    storyId: string,
    format: string,
    exported: { content: string; contentType: string },
  ): void {
    // best-effort; test environments have no object URLs
    if (typeof URL.createObjectURL !== 'function') return;
    const blob = new Blob([exported.content], {
      type: exported.contentType,
    });
    const link = document.createElement('a');
    link.href = URL.createObjectURL(blob);
    const extension = format === 'markdown' ? 'md' : format;
    link.download = `story-${storyId}.${extension}`;
    link.click();
    URL.revokeObjectURL(link.href);
  }

  private render(): void {
    const state = this.state.get();
    this.options.onNavigate?.(state.screen);
    switch (state.screen) {
      case 'loading': {
        this.screen.innerHTML = '<p class="loading">Loading…</p>';
        return;
      }
      case 'error': {
        renderErrorBanner(this.screen, state.error);
        return;
      }
      case 'gallery': {
        renderGallery(this.screen, state.patterns, {
          onSelect: (pattern) => this.selectPattern(pattern),
        });
        return;
      }
      case 'premise': {
        this.renderPremiseEntry(state.chosen);
        return;
      }
      case 'walkthrough': {
        if (!state.view) return;
        renderWalkthrough(this.screen, state.view, {
          onDraft: () => void this.draftNext(),
          onAccept: () => void this.acceptCurrent(),
          onRegenerate: (suggestion) =>
            void this.regenerateCurrent(suggestion),
          onSuggestionInput: (text) => this.setSuggestion(text),
        });
        return;
      }
      case 'storyboard': {
        if (!state.board) return;
        renderStoryboard(this.screen, state.board, {
          onExport: (format) => void this.exportStory(format),
        });
        return;
      }
    }
  }

  private renderPremiseEntry(chosen: Pattern | null): void {
    this.screen.innerHTML = '';
    const form = document.createElement('section');
    form.className = 'premise-entry';

    const heading = document.createElement('h2');
    heading.textContent = chosen
      ? `Premise for ${chosen.title}`
      : 'Premise';
    form.appendChild(heading);

    const box = document.createElement('textarea');
    box.className = 'premise-box';
    box.placeholder = 'One or two sentences to start from';
    form.appendChild(box);

    const begin = document.createElement('button');
    begin.type = 'button';
    begin.className = 'begin-btn';
    begin.textContent = 'Begin composition';
    begin.addEventListener('click', () =>
      void this.beginComposition(box.value),
    );
    form.appendChild(begin);

    const back = document.createElement('button');
    back.type = 'button';
    back.className = 'back-btn';
    back.textContent = 'Back to gallery';
    back.addEventListener('click', () =>
      this.state.set({ screen: 'gallery', chosen: null }),
    );
    form.appendChild(back);

    this.screen.appendChild(form);
  }
}
