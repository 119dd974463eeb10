/**
 * In-memory stand-in for the composition service, serving texts that a
 * recorded backend run produced. It keeps the same state machine the
 * real service enforces, so illegal transitions earn honest 409s
 * instead of whatever the happy path would return.
 */

import type { FetchLike } from '../src/api';
import type {
  Pattern,
  Session,
  Story,
  StoryboardDocument,
} from '../src/types';
import raw from './fixtures.json';

export interface Fixtures {
  premise: string;
  patterns: Pattern[];
  walk: {
    pattern_id: string;
    plain_first_draft: string;
    suggestion: string;
    drafts: string[];
    title: string;
    summary: string;
  };
  story: Story;
  storyboard: StoryboardDocument;
  exports: { markdown: string; html: string };
}

export const fixtures = raw as unknown as Fixtures;

function json(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'content-type': 'application/json' },
  });
}

function failure(status: number, code: string, message: string): Response {
  return json(status, { code, message, details: {} });
}

export class MockBackend {
  readonly sessions = new Map<string, Session>();
  /** "METHOD /path?query" per request, for traffic assertions. */
  readonly requests: string[] = [];
  /** When true every request rejects like an unreachable host. */
  down = false;

  private counter = 0;
  private conflictNext = false;
  private gate: Promise<void> | null = null;

  readonly fetch: FetchLike = (url, init) => this.handle(url, init);

  /** The next mutation answers 409 without touching any session. */
  failNextMutation(): void {
    this.conflictNext = true;
  }

  /** Hold the next request until the returned release is called. */
  pauseNext(): () => void {
    let release!: () => void;
    this.gate = new Promise<void>((resolve) => {
      release = resolve;
    });
    return release;
  }

  private async handle(url: string, init?: RequestInit): Promise<Response> {
    if (this.down) {
      throw new TypeError('fetch failed');
    }
    if (this.gate) {
      const gate = this.gate;
      this.gate = null;
      await gate;
    }
    const method = (init?.method ?? 'GET').toUpperCase();
    const parsed = new URL(url);
    this.requests.push(`${method} ${parsed.pathname}${parsed.search}`);
    const body = init?.body
      ? (JSON.parse(String(init.body)) as Record<string, unknown>)
      : {};
    return this.route(method, parsed, body);
  }

  private route(
    method: string,
    url: URL,
    body: Record<string, unknown>,
  ): Response {
    const path = url.pathname;

    if (method === 'GET' && path === '/patterns') {
      return json(200, { patterns: fixtures.patterns });
    }

    let match = /^\/patterns\/([^/]+)$/.exec(path);
    if (method === 'GET' && match) {
      const pattern = fixtures.patterns.find((p) => p.id === match![1]);
      if (!pattern) {
        return failure(404, 'unknown-pattern', `no pattern ${match[1]}`);
      }
      return json(200, pattern);
    }

    if (method === 'POST' && path === '/sessions') {
      return this.createSession(body);
    }

    match = /^\/sessions\/([^/]+)$/.exec(path);
    if (method === 'GET' && match) {
      const session = this.sessions.get(match[1]);
      if (!session) {
        return failure(404, 'not-found', `no session ${match[1]}`);
      }
      return json(200, session);
    }

    match = /^\/sessions\/([^/]+)\/(draft|regenerate|accept)$/.exec(path);
    if (method === 'POST' && match) {
      const session = this.sessions.get(match[1]);
      if (!session) {
        return failure(404, 'not-found', `no session ${match[1]}`);
      }
      if (this.conflictNext) {
        this.conflictNext = false;
        return failure(409, 'invalid-state', 'lost the race to another writer');
      }
      const suggestion =
        typeof body.suggestion === 'string' ? body.suggestion : null;
      if (match[2] === 'draft') return this.draft(session, suggestion);
      if (match[2] === 'regenerate') {
        return this.regenerate(session, suggestion);
      }
      return this.accept(session);
    }

    match = /^\/stories\/([^/]+)$/.exec(path);
    if (method === 'GET' && match) {
      if (match[1] !== fixtures.story.id) {
        return failure(404, 'not-found', `no story ${match[1]}`);
      }
      return json(200, fixtures.story);
    }

    match = /^\/stories\/([^/]+)\/export$/.exec(path);
    if (method === 'GET' && match) {
      if (match[1] !== fixtures.story.id) {
        return failure(404, 'not-found', `no story ${match[1]}`);
      }
      return this.exportStory(url.searchParams.get('format') ?? 'html');
    }

    return failure(404, 'not-found', `no route ${method} ${path}`);
  }

  private createSession(body: Record<string, unknown>): Response {
    const patternId = String(body.pattern_id ?? '');
    const premise = String(body.premise ?? '');
    if (!fixtures.patterns.some((p) => p.id === patternId)) {
      return failure(404, 'unknown-pattern', `no pattern ${patternId}`);
    }
    if (!premise.trim()) {
      return failure(422, 'invalid-premise', 'premise is empty');
    }
    this.counter += 1;
    const session: Session = {
      id: `s${this.counter}`,
      premise,
      pattern_id: patternId,
      cursor: 1,
      status: 'drafting',
      events: [],
      title: null,
      summary: null,
      story_id: null,
    };
    this.sessions.set(session.id, session);
    return json(201, session);
  }

  private stageCount(session: Session): number {
    const pattern = fixtures.patterns.find(
      (p) => p.id === session.pattern_id,
    );
    return pattern ? pattern.stages.length : 0;
  }

  /* First drafts replay the recorded run: stage 1 came out plain and
     was regenerated; stages 2..N stood as first drafted. */
  private draftText(cursor: number): string {
    if (cursor === 1) return fixtures.walk.plain_first_draft;
    return fixtures.walk.drafts[cursor - 1];
  }

  private draft(session: Session, suggestion: string | null): Response {
    if (session.status !== 'drafting') {
      return failure(
        409,
        'invalid-state',
        `cannot draft while ${session.status}`,
      );
    }
    session.events.push({
      stage_index: session.cursor,
      text: this.draftText(session.cursor),
      suggestion,
      revision: 1,
      image_prompt: null,
    });
    session.status = 'reviewing';
    return json(200, session);
  }

  private regenerate(session: Session, suggestion: string | null): Response {
    if (session.status !== 'reviewing') {
      return failure(
        409,
        'invalid-state',
        `cannot regenerate while ${session.status}`,
      );
    }
    const event = session.events[session.events.length - 1];
    session.events[session.events.length - 1] = {
      ...event,
      text: fixtures.walk.drafts[session.cursor - 1],
      suggestion,
      revision: event.revision + 1,
    };
    return json(200, session);
  }

  private accept(session: Session): Response {
    if (session.status !== 'reviewing') {
      return failure(
        409,
        'invalid-state',
        `cannot accept while ${session.status}`,
      );
    }
    if (session.cursor === this.stageCount(session)) {
      session.status = 'complete';
      session.title = fixtures.walk.title;
      session.summary = fixtures.walk.summary;
      session.story_id = fixtures.story.id;
    } else {
      session.cursor += 1;
      session.status = 'drafting';
    }
    return json(200, session);
  }

  private exportStory(format: string): Response {
    if (format === 'json') {
      return json(200, fixtures.storyboard);
    }
    if (format === 'markdown') {
      return new Response(fixtures.exports.markdown, {
        status: 200,
        headers: { 'content-type': 'text/markdown; charset=utf-8' },
      });
    }
    if (format === 'html') {
      return new Response(fixtures.exports.html, {
        status: 200,
        headers: { 'content-type': 'text/html; charset=utf-8' },
      });
    }
    return failure(422, 'validation', `unknown format ${format}`);
  }
}
