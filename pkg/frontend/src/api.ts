/**
 * Typed HTTP client for the session service.
 *
 * The client never interprets values: amounts stay the decimal strings
 * the service produced. Mutations are awaited one at a time by the view
 * model; reads may race behind, so every response's X-KG-Revision is
 * tracked and a stale read (lower revision than already seen) is
 * refetched until it catches up.
 */

import type {
    CreateSessionResponse,
    EvalDelta,
    ExplainNode,
    FieldDiagnostic,
    MissingReport,
} from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
    constructor(
        readonly status: number,
        readonly diagnostics: FieldDiagnostic[],
        message: string,
    ) {
        super(message);
        this.name = 'ApiError';
    }
}

const MAX_STALE_RETRIES = 5;

export class SessionClient {
    private sessionId: string | null = null;
    private highestRevision = -1;

    constructor(
        private readonly baseUrl: string,
        private readonly fetchFn: FetchLike = (...args) => fetch(...args),
    ) {}

    get session(): string | null {
        return this.sessionId;
    }

    get revision(): number {
        return this.highestRevision;
    }

    private track(response: Response): number {
        const header = response.headers.get('X-KG-Revision');
        const revision = header === null ? -1 : Number(header);
        if (revision > this.highestRevision) {
            this.highestRevision = revision;
        }
        return revision;
    }

    private async request(method: string, path: string, body?: unknown): Promise<Response> {
        const response = await this.fetchFn(`${this.baseUrl}${path}`, {
            method,
            headers: body === undefined ? undefined : { 'Content-Type': 'application/json' },
            body: body === undefined ? undefined : JSON.stringify(body),
        });
        this.track(response);
        return response;
    }

    private async fail(response: Response): Promise<never> {
        let diagnostics: FieldDiagnostic[] = [];
        let message = `HTTP ${response.status}`;
        try {
            const payload = await response.json();
            if (Array.isArray(payload.errors)) {
                diagnostics = payload.errors;
                message = diagnostics.map((d) => `${d.field}: ${d.message}`).join('; ');
            } else if (typeof payload.error === 'string') {
                message = payload.error;
            }
        } catch {
            // non-JSON error body; keep the status message
        }
        throw new ApiError(response.status, diagnostics, message);
    }

    async createSession(graph: string): Promise<string> {
        const response = await this.request('POST', '/v1/sessions', { graph });
        if (response.status !== 201) await this.fail(response);
        const body = (await response.json()) as CreateSessionResponse;
        this.sessionId = body.session_id;
        return body.session_id;
    }

    async patchFacts(
        set: Record<string, string | boolean>,
        clear: string[] = [],
    ): Promise<EvalDelta> {
        const response = await this.request(
            'PATCH',
            `/v1/sessions/${this.sessionId}/facts`,
            { set, clear },
        );
        if (!response.ok) await this.fail(response);
        return (await response.json()) as EvalDelta;
    }

    /** GET with reconciliation: refetch while the response is older than
     * a revision we have already observed. */
    private async freshGet(path: string): Promise<Response> {
        for (let attempt = 0; ; attempt += 1) {
            const response = await this.fetchFn(`${this.baseUrl}${path}`);
            const revision = this.track(response);
            if (!response.ok) await this.fail(response);
            if (revision >= this.highestRevision || attempt >= MAX_STALE_RETRIES) {
                return response;
            }
        }
    }

    async getMissing(): Promise<MissingReport> {
        const response = await this.freshGet(`/v1/sessions/${this.sessionId}/missing`);
        return (await response.json()) as MissingReport;
    }

    async explain(field: string, depth = 1): Promise<ExplainNode> {
        const response = await this.freshGet(
            `/v1/sessions/${this.sessionId}/explain/${field}?depth=${depth}`,
        );
        return (await response.json()) as ExplainNode;
    }
}
