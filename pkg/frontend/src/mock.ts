/**
 * Scripted transport for offline development and contract tests.
 *
 * A recording is an ordered list of expected exchanges; the mock asserts
 * each request matches the next script entry and plays back the recorded
 * response (body and revision header) byte for byte.
 */

import type { FetchLike } from './api.js';

export interface RecordedExchange {
    method: string;
    path: string;
    status: number;
    body: unknown;
    revision?: number;
}

export class ScriptedTransport {
    private cursor = 0;
    readonly requests: { method: string; path: string; payload: unknown }[] = [];

    constructor(private readonly script: RecordedExchange[]) {}

    get exhausted(): boolean {
        return this.cursor >= this.script.length;
    }

    fetch: FetchLike = (url, init) => {
        const method = init?.method ?? 'GET';
        const path = url.replace(/^https?:\/\/[^/]+/, '');
        const expected = this.script[this.cursor];
        if (!expected) {
            return Promise.reject(new Error(`unexpected request ${method} ${path}`));
        }
        if (expected.method !== method || expected.path !== path) {
            return Promise.reject(new Error(
                `script mismatch: got ${method} ${path}, expected ${expected.method} ${expected.path}`,
            ));
        }
        this.cursor += 1;
        this.requests.push({
            method,
            path,
            payload: init?.body ? JSON.parse(String(init.body)) : undefined,
        });
        const headers = new Headers();
        if (expected.revision !== undefined) {
            headers.set('X-KG-Revision', String(expected.revision));
        }
        return Promise.resolve(new Response(JSON.stringify(expected.body), {
            status: expected.status,
            headers,
        }));
    };
}
