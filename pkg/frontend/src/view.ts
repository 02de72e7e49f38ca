/**
 * DOM rendering. Pure function of the view-model state; every displayed
 * number is the verbatim string the service sent.
 */

import type { ExplainPaneNode, InterviewState, InterviewViewModel } from './viewmodel.js';
import type { FieldInfo } from './types.js';

function el<K extends keyof HTMLElementTagNameMap>(
    doc: Document,
    tag: K,
    attrs: Record<string, string> = {},
    text?: string,
): HTMLElementTagNameMap[K] {
    const node = doc.createElement(tag);
    for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
    if (text !== undefined) node.textContent = text;
    return node;
}

function questionControl(doc: Document, question: FieldInfo): HTMLElement {
    if (question.kind === 'boolean') {
        const select = el(doc, 'select', { 'data-testid': 'answer' });
        select.append(el(doc, 'option', { value: 'true' }, 'yes'), el(doc, 'option', { value: 'false' }, 'no'));
        return select;
    }
    if (question.kind === 'text' && question.enum) {
        const select = el(doc, 'select', { 'data-testid': 'answer' });
        for (const choice of question.enum) {
            select.append(el(doc, 'option', { value: choice }, choice));
        }
        return select;
    }
    const input = el(doc, 'input', {
        'data-testid': 'answer',
        type: 'text',
        inputmode: 'decimal',
        placeholder: question.kind === 'money' ? '0.00' : '',
    });
    return input;
}

function renderQuestion(doc: Document, state: InterviewState, vm: InterviewViewModel): HTMLElement {
    const panel = el(doc, 'section', { 'data-testid': 'question-panel' });
    if (state.phase === 'done') {
        panel.append(el(doc, 'p', { 'data-testid': 'flow-done' }, 'All done. Nothing else is needed.'));
    } else if (state.question) {
        const question = state.question;
        panel.append(el(doc, 'label', { 'data-testid': 'question-label', for: 'answer' }, question.label));
        const control = questionControl(doc, question);
        control.id = 'answer';
        panel.append(control);
        for (const diag of state.inlineErrors) {
            panel.append(el(doc, 'p', { class: 'error', 'data-testid': 'inline-error' }, `${diag.field}: ${diag.message}`));
        }
        const submit = el(doc, 'button', { 'data-testid': 'submit' }, 'Continue');
        submit.addEventListener('click', () => {
            const value = (control as HTMLInputElement | HTMLSelectElement).value;
            void vm.answer(value);
        });
        panel.append(submit);
    }
    if (state.answered.length > 0) {
        const back = el(doc, 'button', { 'data-testid': 'back' }, 'Back');
        back.addEventListener('click', () => void vm.back());
        panel.append(back);
    }
    return panel;
}

function renderOutputs(doc: Document, state: InterviewState, vm: InterviewViewModel): HTMLElement {
    const panel = el(doc, 'section', { 'data-testid': 'output-panel' });
    panel.append(el(doc, 'h2', {}, 'Results'));
    for (const decision of state.decisions) {
        panel.append(el(
            doc, 'p', { 'data-testid': `decision-${decision.graph}` },
            `${decision.graph}: ${decision.decision}`,
        ));
    }
    const list = el(doc, 'dl');
    for (const field of [...state.outputs.keys()].sort()) {
        const value = state.outputs.get(field) ?? null;
        list.append(el(doc, 'dt', {}, field));
        const shown = value === null ? 'pending' : String(value);
        const dd = el(doc, 'dd', { 'data-testid': `output-${field}` }, shown);
        if (value !== null) {
            const why = el(doc, 'button', { 'data-testid': `why-${field}` }, 'Explain why');
            why.addEventListener('click', () => void vm.openExplain(field));
            dd.append(' ', why);
        } else {
            dd.title = 'Waiting on the missing answers listed above.';
        }
        list.append(dd);
    }
    panel.append(list);
    return panel;
}

function renderExplainNode(doc: Document, pane: ExplainPaneNode, vm: InterviewViewModel): HTMLElement {
    const item = el(doc, 'li', { 'data-testid': `explain-${pane.node.field}` });
    const isLeaf = pane.node.gist === 'input-fact' || pane.node.gist === 'default';
    if (!isLeaf) {
        const toggle = el(doc, 'button', { 'data-testid': `toggle-${pane.node.field}` },
            pane.expanded ? '-' : '+');
        toggle.addEventListener('click', () => void vm.expand(pane));
        item.append(toggle, ' ');
    }
    item.append(el(doc, 'span', {}, pane.node.text));
    if (pane.expanded && pane.children.length > 0) {
        const children = el(doc, 'ul');
        for (const child of pane.children) {
            children.append(renderExplainNode(doc, child, vm));
        }
        item.append(children);
    }
    return item;
}

function renderExplain(doc: Document, state: InterviewState, vm: InterviewViewModel): HTMLElement {
    const panel = el(doc, 'section', { 'data-testid': 'explain-panel' });
    if (!state.explain) return panel;
    panel.append(el(doc, 'h2', {}, `Why ${state.explain.node.label}?`));
    const close = el(doc, 'button', { 'data-testid': 'close-explain' }, 'Close');
    close.addEventListener('click', () => vm.closeExplain());
    panel.append(close);
    const tree = el(doc, 'ul');
    tree.append(renderExplainNode(doc, state.explain, vm));
    panel.append(tree);
    return panel;
}

export function render(container: HTMLElement, state: InterviewState, vm: InterviewViewModel): void {
    const doc = container.ownerDocument;
    container.replaceChildren();
    if (state.fatalError) {
        container.append(el(doc, 'p', { class: 'error', 'data-testid': 'fatal' }, state.fatalError));
        return;
    }
    container.append(
        renderQuestion(doc, state, vm),
        renderOutputs(doc, state, vm),
        renderExplain(doc, state, vm),
    );
}

export function mount(container: HTMLElement, vm: InterviewViewModel): void {
    vm.subscribe((state) => render(container, state, vm));
}
