import { StudyClient } from "./api.js";
import { TaskController } from "./ui.js";

const root = document.getElementById("app");
if (root) {
  const controller = new TaskController(root, new StudyClient(""));
  void controller.start();
}
