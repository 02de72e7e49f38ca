/**
 * Entry point: wire the client, view model and renderer together.
 *
 * Query parameters: ?api=http://host:port (default same origin),
 * ?graph=<graph id> (default f1040_mini).
 */

import { SessionClient } from './api.js';
import { InterviewViewModel } from './viewmodel.js';
import { mount } from './view.js';

const params = new URLSearchParams(window.location.search);
const api = params.get('api') ?? window.location.origin;
const graph = params.get('graph') ?? 'f1040_mini';

const container = document.getElementById('app');
if (!container) {
    throw new Error('missing #app container');
}

const vm = new InterviewViewModel(new SessionClient(api));
mount(container, vm);
void vm.start(graph);
