import { startApp } from "./app.js";

const mount = document.getElementById("app");
if (mount === null) throw new Error("missing #app mount point");
void startApp(mount).catch(() => {
  /* error banner already rendered; retry button re-enters startApp */
});
