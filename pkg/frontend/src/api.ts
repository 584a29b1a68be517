/** Typed client for the recipelab JSON API (/v1). */

export type Mode = 'instructions' | 'ingredients';
export type HighlightField = 'ingredients' | 'generated_text';

export interface ClientConfig {
  baseUrl: string;
  /** Injected at build/deploy time; end users never type it. */
  apiKey: string;
}

export interface GenerateRequest {
  mode: Mode;
  title: string;
  ingredients?: string[];
  instructions?: string;
  k: number;
  seed?: number;
}

export interface HighlightSpan {
  field: HighlightField;
  start: number;
  end: number;
  root_noun: string;
}

export interface ReferenceRecipe {
  id: string;
  title: string;
  ingredients: string[];
  ingredient_names: string[];
  steps: string[];
}

export interface EvaluationReport {
  mode: Mode;
  precision: number | null;
  recall: number | null;
  f1: number | null;
  n_generated_ingredients: number | null;
  bleu: number | null;
  brevity_penalty: number | null;
  rouge_l_f: number | null;
  nted: number | null;
  jaccard_coherence: number | null;
}

export interface SamplingInfo {
  k: number;
  seed: number;
  max_new_tokens: number;
}

export interface GenerateResponse {
  output: string;
  truncated: boolean;
  highlights: HighlightSpan[];
  reference: { recipe: ReferenceRecipe; score: number } | null;
  report: EvaluationReport | null;
  sampling: SamplingInfo;
  elapsed_ms: number;
}

export interface SavedGeneration {
  id: number;
  created_at: string;
  mode: Mode;
  context: Record<string, string>;
  output: string;
  sampling: SamplingInfo;
  report: EvaluationReport | null;
  reference_id: string | null;
}

export interface SavedGenerationDetail extends SavedGeneration {
  ratings: { value: number; created_at: string }[];
  comments: { text: string; created_at: string }[];
}

export interface GenerationList {
  items: SavedGeneration[];
  total: number;
  page: number;
  page_size: number;
}

export interface HealthInfo {
  status: string;
  model_loaded: boolean;
  corpus_size: number;
  vocab_hash: string;
}

/** Server errors carry {error: {code, message}}; surface both. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let code = 'unknown';
  let message = `request failed with status ${response.status}`;
  try {
    const body = (await response.json()) as { error?: { code?: string; message?: string } };
    if (body.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
    }
  } catch {
    // non-JSON error body; keep the generic message
  }
  return new ApiError(response.status, code, message);
}

export class RecipeLabClient {
  constructor(private readonly config: ClientConfig) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(`${this.config.baseUrl}${path}`, {
      ...init,
      headers: {
        'content-type': 'application/json',
        'x-api-key': this.config.apiKey,
        ...(init?.headers ?? {}),
      },
    });
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  health(): Promise<HealthInfo> {
    return this.request('/v1/health');
  }

  generate(req: GenerateRequest): Promise<GenerateResponse> {
    return this.request('/v1/generate', { method: 'POST', body: JSON.stringify(req) });
  }

  reference(params: { title?: string; ingredients?: string; instructions?: string }) {
    const query = new URLSearchParams();
    for (const [key, value] of Object.entries(params)) {
      if (value) query.set(key, value);
    }
    return this.request<{ recipe: ReferenceRecipe; score: number }>(
      `/v1/reference?${query.toString()}`,
    );
  }

  saveGeneration(body: {
    mode: Mode;
    context: Record<string, string>;
    output: string;
    sampling: SamplingInfo;
    report: EvaluationReport | null;
    reference_id: string | null;
  }): Promise<SavedGeneration> {
    return this.request('/v1/generations', { method: 'POST', body: JSON.stringify(body) });
  }

  listGenerations(page = 1, pageSize = 10): Promise<GenerationList> {
    return this.request(`/v1/generations?page=${page}&page_size=${pageSize}`);
  }

  getGeneration(id: number): Promise<SavedGenerationDetail> {
    return this.request(`/v1/generations/${id}`);
  }

  rate(id: number, value: number) {
    return this.request<{ generation_id: number; value: number }>(
      `/v1/generations/${id}/rating`,
      { method: 'POST', body: JSON.stringify({ value }) },
    );
  }

  comment(id: number, text: string) {
    return this.request<{ generation_id: number; text: string }>(
      `/v1/generations/${id}/comments`,
      { method: 'POST', body: JSON.stringify({ text }) },
    );
  }
}
