/**
 * Interview state machine.
 *
 * All state derives from service responses plus local UI selections; the
 * client never computes a value itself. One mutation is in flight at a
 * time; the current question is always the service's next pruned
 * completeness question, falling back to the first still-missing input.
 */

import { ApiError, SessionClient } from './api.js';
import type {
    DecisionEntry,
    ExplainNode,
    FieldDiagnostic,
    FieldInfo,
    MissingReport,
} from './types.js';

export type Phase = 'idle' | 'asking' | 'done' | 'failed';

export interface AnsweredFact {
    field: string;
    label: string;
    raw: string;
}

export interface ExplainPaneNode {
    node: ExplainNode;
    expanded: boolean;
    children: ExplainPaneNode[];
}

export interface InterviewState {
    phase: Phase;
    graph: string | null;
    sessionId: string | null;
    question: FieldInfo | null;
    questionSource: 'eligibility' | 'input' | null;
    answered: AnsweredFact[];
    outputs: Map<string, string | boolean | null>;
    decisions: DecisionEntry[];
    inlineErrors: FieldDiagnostic[];
    fatalError: string | null;
    explain: ExplainPaneNode | null;
    busy: boolean;
}

export type Listener = (state: InterviewState) => void;

function paneNode(node: ExplainNode): ExplainPaneNode {
    return { node, expanded: false, children: node.children.map(paneNode) };
}

export class InterviewViewModel {
    readonly state: InterviewState = {
        phase: 'idle',
        graph: null,
        sessionId: null,
        question: null,
        questionSource: null,
        answered: [],
        outputs: new Map(),
        decisions: [],
        inlineErrors: [],
        fatalError: null,
        explain: null,
        busy: false,
    };

    private listeners: Listener[] = [];

    constructor(private readonly client: SessionClient) {}

    subscribe(listener: Listener): void {
        this.listeners.push(listener);
        listener(this.state);
    }

    private notify(): void {
        for (const listener of this.listeners) listener(this.state);
    }

    private nextQuestion(report: MissingReport): [FieldInfo | null, 'eligibility' | 'input' | null] {
        const question = report.questions[0];
        if (question) return [question, 'eligibility'];
        const missing = report.missing_inputs[0];
        const input = missing?.inputs[0];
        if (input) return [input, 'input'];
        return [null, null];
    }

    private async refresh(): Promise<void> {
        const report = await this.client.getMissing();
        this.state.decisions = report.decisions;
        const [question, source] = this.nextQuestion(report);
        this.state.question = question;
        this.state.questionSource = source;
        this.state.phase = question === null ? 'done' : 'asking';
    }

    private applyDelta(changed: Record<string, string | boolean | null>, unknown: string[]): void {
        const asked = new Set(this.state.answered.map((a) => a.field));
        if (this.state.question) asked.add(this.state.question.field);
        for (const [field, value] of Object.entries(changed)) {
            if (!asked.has(field)) this.state.outputs.set(field, value);
        }
        for (const field of unknown) {
            this.state.outputs.set(field, null);
        }
    }

    private async guarded(work: () => Promise<void>): Promise<void> {
        if (this.state.busy) return;
        this.state.busy = true;
        this.notify();
        try {
            await work();
            this.state.fatalError = null;
        } catch (error) {
            if (error instanceof ApiError && error.status === 422) {
                this.state.inlineErrors = error.diagnostics;
            } else {
                this.state.fatalError = String(error instanceof Error ? error.message : error);
                this.state.phase = 'failed';
            }
        } finally {
            this.state.busy = false;
            this.notify();
        }
    }

    async start(graph: string): Promise<void> {
        await this.guarded(async () => {
            this.state.graph = graph;
            this.state.sessionId = await this.client.createSession(graph);
            this.state.answered = [];
            this.state.outputs = new Map();
            this.state.explain = null;
            this.state.inlineErrors = [];
            await this.refresh();
        });
    }

    /** Submit the raw answer text for the current question. */
    async answer(raw: string): Promise<void> {
        const question = this.state.question;
        if (!question) return;
        await this.guarded(async () => {
            const delta = await this.client.patchFacts({ [question.field]: raw });
            this.state.inlineErrors = [];
            this.state.answered.push({ field: question.field, label: question.label, raw });
            this.applyDelta(delta.changed, delta.unknown);
            await this.refresh();
        });
    }

    /** Retract the most recent answer and re-ask. */
    async back(): Promise<void> {
        const last = this.state.answered[this.state.answered.length - 1];
        if (!last) return;
        await this.guarded(async () => {
            const delta = await this.client.patchFacts({}, [last.field]);
            this.state.inlineErrors = [];
            this.state.answered.pop();
            this.applyDelta(delta.changed, delta.unknown);
            await this.refresh();
        });
    }

    async openExplain(field: string): Promise<void> {
        await this.guarded(async () => {
            const root = await this.client.explain(field, 1);
            this.state.explain = { ...paneNode(root), expanded: true };
        });
    }

    closeExplain(): void {
        this.state.explain = null;
        this.notify();
    }

    /** Expand one node, lazily fetching one more level when needed. */
    async expand(pane: ExplainPaneNode): Promise<void> {
        if (pane.expanded) {
            pane.expanded = false;  // collapse is purely local
            this.notify();
            return;
        }
        if (pane.children.length === 0 && pane.node.gist !== 'input-fact' && pane.node.gist !== 'default') {
            await this.guarded(async () => {
                const fetched = await this.client.explain(pane.node.field, 1);
                pane.children = fetched.children.map(paneNode);
            });
        }
        pane.expanded = true;
        this.notify();
    }
}
