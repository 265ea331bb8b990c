import { ApiClient } from './api';
import { App } from './app';

const apiBase =
  (typeof localStorage !== 'undefined' && localStorage.getItem('apiBase')) ||
  'http://127.0.0.1:8000';

const root = document.getElementById('app');
if (root) {
  const app = new App(root, new ApiClient(apiBase));
  (window as unknown as { annograph: App }).annograph = app;
  app.start();
}
