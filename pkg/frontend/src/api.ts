import type { SegmentParams, SegmentResponse, SessionInfo } from './types';

export class ApiRequestError extends Error {
  constructor(public status: number, public token: string, detail: string) {
    super(`${token}: ${detail}`);
  }
}

type FetchLike = typeof fetch;

/** Thin typed wrapper over the segmentation server routes.
 *
 * The fetch implementation is injectable so tests can intercept every
 * request; the UI performs no segmentation math of its own.
 */
export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = globalThis.fetch.bind(globalThis),
  ) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  private async parseError(res: Response): Promise<never> {
    let token = `HTTP${res.status}`;
    let detail = '';
    try {
      const body = (await res.json()) as { error?: string; detail?: string };
      token = body.error ?? token;
      detail = body.detail ?? '';
    } catch {
      /* non-JSON error body */
    }
    throw new ApiRequestError(res.status, token, detail);
  }

  async createSessionFromPgm(pgm: Uint8Array, spacing?: number[]): Promise<SessionInfo> {
    const body = JSON.stringify({
      pgm_b64: bytesToBase64(pgm),
      spacing: spacing ?? [1.0, 1.0],
    });
    const res = await this.fetchImpl(this.url('/sessions'), {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body,
    });
    if (res.status !== 201) return this.parseError(res);
    return (await res.json()) as SessionInfo;
  }

  async createSessionFromVolume(headerText: string, raw: Uint8Array): Promise<SessionInfo> {
    const res = await this.fetchImpl(this.url('/sessions'), {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ header_text: headerText, data_b64: bytesToBase64(raw) }),
    });
    if (res.status !== 201) return this.parseError(res);
    return (await res.json()) as SessionInfo;
  }

  async getSlice(
    session: string,
    axis: string,
    index: number,
    window?: [number, number],
  ): Promise<Uint8Array> {
    const q = window ? `&window=${window[0]},${window[1]}` : '';
    const res = await this.fetchImpl(
      this.url(`/sessions/${session}/slice?axis=${axis}&index=${index}${q}`),
    );
    if (!res.ok) return this.parseError(res);
    return new Uint8Array(await res.arrayBuffer());
  }

  async segment(session: string, params: SegmentParams): Promise<SegmentResponse> {
    const res = await this.fetchImpl(this.url(`/sessions/${session}/segment`), {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(params),
    });
    if (!res.ok) return this.parseError(res);
    return (await res.json()) as SegmentResponse;
  }

  /** Raw mask bytes (PGM for 2D sessions, JSON envelope for 3D). */
  async getMask(session: string): Promise<Uint8Array> {
    const res = await this.fetchImpl(this.url(`/sessions/${session}/mask`));
    if (!res.ok) return this.parseError(res);
    return new Uint8Array(await res.arrayBuffer());
  }

  async listTemplates(): Promise<string[]> {
    const res = await this.fetchImpl(this.url('/templates'));
    if (!res.ok) return this.parseError(res);
    const body = (await res.json()) as { templates: string[] };
    return body.templates;
  }
}

export function bytesToBase64(bytes: Uint8Array): string {
  if (typeof Buffer !== 'undefined') {
    return Buffer.from(bytes).toString('base64');
  }
  let bin = '';
  const chunk = 0x8000;
  for (let i = 0; i < bytes.length; i += chunk) {
    bin += String.fromCharCode(...bytes.subarray(i, i + chunk));
  }
  return btoa(bin);
}
