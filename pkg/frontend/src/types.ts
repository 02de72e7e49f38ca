/** Wire types of the session service (v1). Amounts are decimal strings. */

export interface CreateSessionResponse {
    graph: string;
    session_id: string;
}

export interface EvalDelta {
    changed: Record<string, string | boolean | null>;
    errors: { message: string; model: string }[];
    unknown: string[];
}

export interface FieldInfo {
    field: string;
    kind: 'money' | 'number' | 'boolean' | 'text';
    label: string;
    enum?: string[];
}

export interface QuestionEntry extends FieldInfo {
    graph: string;
    relevant: string[];
}

export interface DecisionEntry {
    decision: string;
    graph: string;
}

export interface MissingReport {
    decisions: DecisionEntry[];
    missing_inputs: { field: string; inputs: FieldInfo[] }[];
    questions: QuestionEntry[];
}

export interface ExplainNode {
    children: ExplainNode[];
    field: string;
    gist: string;
    label: string;
    text: string;
    value: string;
}

export interface FieldDiagnostic {
    code: string;
    field: string;
    message: string;
}
