/**
 * Thin typed client over the service's documented endpoints. Every
 * mutation and every read goes through here; the UI holds no other
 * channel to the backend.
 */

import type {
  ApiErrorBody,
  Pattern,
  Session,
  Story,
  StoryboardDocument,
} from './types';

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly details: unknown;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.status = status;
    this.code = body.code;
    this.details = body.details;
  }
}

export type FetchLike = (
  url: string,
  init?: RequestInit,
) => Promise<Response>;

export class Client {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, '');
    // bind so a bare window.fetch keeps its receiver
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { 'content-type': 'application/json' };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      const parsed = (await response.json()) as ApiErrorBody;
      throw new ApiError(response.status, parsed);
    }
    return (await response.json()) as T;
  }

  async listPatterns(): Promise<Pattern[]> {
    const data = await this.request<{ patterns: Pattern[] }>(
      'GET',
      '/patterns',
    );
    return data.patterns;
  }

  getPattern(patternId: string): Promise<Pattern> {
    return this.request('GET', `/patterns/${encodeURIComponent(patternId)}`);
  }

  createSession(premise: string, patternId: string): Promise<Session> {
    return this.request('POST', '/sessions', {
      premise,
      pattern_id: patternId,
    });
  }

  getSession(sessionId: string): Promise<Session> {
    return this.request('GET', `/sessions/${encodeURIComponent(sessionId)}`);
  }

  draft(sessionId: string, suggestion?: string): Promise<Session> {
    return this.request(
      'POST',
      `/sessions/${encodeURIComponent(sessionId)}/draft`,
      suggestion ? { suggestion } : {},
    );
  }

  regenerate(sessionId: string, suggestion?: string): Promise<Session> {
    return this.request(
      'POST',
      `/sessions/${encodeURIComponent(sessionId)}/regenerate`,
      suggestion ? { suggestion } : {},
    );
  }

  accept(sessionId: string): Promise<Session> {
    return this.request(
      'POST',
      `/sessions/${encodeURIComponent(sessionId)}/accept`,
    );
  }

  getStory(storyId: string): Promise<Story> {
    return this.request('GET', `/stories/${encodeURIComponent(storyId)}`);
  }

  getStoryboard(storyId: string): Promise<StoryboardDocument> {
    return this.request(
      'GET',
      `/stories/${encodeURIComponent(storyId)}/export?format=json`,
    );
  }

  /** Raw export passthrough; the backend's bytes are not reshaped. */
  async exportStory(
    storyId: string,
    format: 'html' | 'markdown' | 'json',
  ): Promise<{ content: string; contentType: string }> {
    const response = await this.fetchFn(
      this.baseUrl +
        `/stories/${encodeURIComponent(storyId)}/export?format=${format}`,
      { method: 'GET' },
    );
    if (!response.ok) {
      const parsed = (await response.json()) as ApiErrorBody;
      throw new ApiError(response.status, parsed);
    }
    return {
      content: await response.text(),
      contentType: response.headers.get('content-type') ?? '',
    };
  }
}
