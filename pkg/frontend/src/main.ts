import { mount } from "./app.js";

mount(document, window.location);
