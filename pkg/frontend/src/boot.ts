import { ApiClient } from "./api.js";
import { App } from "./main.js";
import { ViewState } from "./state.js";

const root = document.getElementById("app");
if (root) {
  new App(new ApiClient(window.location.origin), new ViewState()).mount(root);
}
