/**
 * Wire types for the composition service. These mirror the JSON the
 * backend serves; the UI never invents fields of its own.
 */

export interface Stage {
  index: number;
  name: string;
  description: string;
}

export interface Pattern {
  id: string;
  title: string;
  genre: string;
  stages: Stage[];
  provenance: string;
  source_titles: string[];
}

export interface SessionEvent {
  stage_index: number;
  text: string;
  suggestion: string | null;
  revision: number;
  image_prompt: string | null;
}

export type SessionStatus = 'drafting' | 'reviewing' | 'complete';

export interface Session {
  id: string;
  premise: string;
  pattern_id: string;
  cursor: number;
  status: SessionStatus;
  events: SessionEvent[];
  title: string | null;
  summary: string | null;
  story_id: string | null;
}

export interface Story {
  id: string;
  title: string;
  premise: string;
  genre: string;
  pattern_id: string;
  events: string[];
  summary: string;
}

export interface Panel {
  stage_name: string;
  event_text: string;
  image_prompt: string;
  image_ref: string | null;
}

export interface StoryboardDocument {
  title: string;
  premise: string;
  summary: string;
  panels: Panel[];
}

export interface ApiErrorBody {
  code: string;
  message: string;
  details: unknown;
}
