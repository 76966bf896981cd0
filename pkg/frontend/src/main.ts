import { mount } from "./app.js";

const root = document.getElementById("app");
if (root) {
  const params = new URLSearchParams(window.location.search);
  const baseUrl = params.get("api") ?? "http://127.0.0.1:8437";
  const app = mount(root, baseUrl);
  const sessionId = params.get("session");
  if (sessionId) void app.resume(sessionId);
}
