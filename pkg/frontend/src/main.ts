import { App } from "./app";
import { HttpApi } from "./api";

// Single configuration knob: the API base, from <body data-api-base> or same origin.
const base = document.body.dataset.apiBase ?? "";
const app = new App(document.getElementById("app") as HTMLElement, new HttpApi(base));
app.init().catch((err) => {
  const status = document.querySelector(".period-status");
  if (status) status.textContent = `failed to load: ${err}`;
});
