/** Browser entry point: mount the workbench against the serving origin
 * (override with ?api=http://host:port). */

import { ApiClient } from "./api.js";
import { WorkbenchApp } from "./app.js";

const params = new URLSearchParams(window.location.search);
const api = new ApiClient(params.get("api") ?? "");
const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app mount point");
}
const app = new WorkbenchApp(root, api);
void app.init();
