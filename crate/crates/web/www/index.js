import init, { normalize, kostant, regularize } from "../pkg/operforge_web.js";

const $ = (id) => document.getElementById(id);

function wire(button, output, compute) {
  $(button).addEventListener("click", () => {
    try {
      $(output).textContent = compute();
    } catch (err) {
      $(output).textContent = String(err);
    }
  });
}

await init();

wire("norm-run", "norm-output", () =>
  normalize($("norm-input").value, Number($("norm-precision").value), $("norm-regular").checked));
wire("kostant-run", "kostant-output", () => kostant($("kostant-input").value));
wire("reg-run", "reg-output", () =>
  regularize($("reg-input").value, Number($("reg-cb").value), Number($("reg-db").value)));
