/**
 * Browser half of the viewer: WebGL renderer, lights, orbit controls,
 * click picking, and floating category labels. Everything testable
 * lives in view.ts; this file just puts it on screen.
 */

import * as THREE from "three";
import { OrbitControls } from "three/addons/controls/OrbitControls.js";
import { applyServerCamera } from "./view";
import type { InstanceUserData, SceneView } from "./view";
import type { CameraWire } from "./wire";

function labelSprite(text: string): THREE.Sprite {
  const canvas = document.createElement("canvas");
  const ctx = canvas.getContext("2d")!;
  const pad = 8;
  ctx.font = "28px system-ui, sans-serif";
  canvas.width = Math.ceil(ctx.measureText(text).width) + 2 * pad;
  canvas.height = 40;
  ctx.font = "28px system-ui, sans-serif";
  ctx.fillStyle = "rgba(16, 20, 24, 0.75)";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = "#e8edf2";
  ctx.textBaseline = "middle";
  ctx.fillText(text, pad, canvas.height / 2);
  const texture = new THREE.CanvasTexture(canvas);
  texture.colorSpace = THREE.SRGBColorSpace;
  const sprite = new THREE.Sprite(
    new THREE.SpriteMaterial({ map: texture, depthTest: false })
  );
  const scale = 0.0045;
  sprite.scale.set(canvas.width * scale, canvas.height * scale, 1);
  return sprite;
}

export class Viewer {
  readonly camera: THREE.PerspectiveCamera;
  onPick?: (id: string, category: string) => void;

  private renderer: THREE.WebGLRenderer;
  private scene = new THREE.Scene();
  private controls: OrbitControls;
  private current: SceneView | null = null;
  private raycaster = new THREE.Raycaster();

  constructor(private container: HTMLElement) {
    this.renderer = new THREE.WebGLRenderer({ antialias: true });
    this.renderer.setPixelRatio(window.devicePixelRatio);
    container.appendChild(this.renderer.domElement);

    this.scene.background = new THREE.Color(0x13181d);
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.7));
    const key = new THREE.DirectionalLight(0xffffff, 1.4);
    key.position.set(4, -6, 8);
    this.scene.add(key);
    const fill = new THREE.DirectionalLight(0xbcd4ff, 0.5);
    fill.position.set(-5, 4, 3);
    this.scene.add(fill);

    this.camera = new THREE.PerspectiveCamera(60, 1, 0.01, 100);
    this.camera.up.set(0, 0, 1);
    this.camera.position.set(4, -4, 3);
    this.controls = new OrbitControls(this.camera, this.renderer.domElement);
    this.controls.target.set(0, 0, 1);

    this.renderer.domElement.addEventListener("click", (ev) => this.pick(ev));
    window.addEventListener("resize", () => this.resize());
    this.resize();
    this.renderer.setAnimationLoop(() => {
      this.controls.update();
      this.renderer.render(this.scene, this.camera);
    });
  }

  /** Swap in a freshly built view; sync the camera when asked to. */
  setView(view: SceneView, serverCamera: CameraWire | null): void {
    if (this.current) this.scene.remove(this.current.root);
    for (const mesh of view.pickables) {
      const data = mesh.userData as InstanceUserData;
      const label = labelSprite(data.category);
      const box = new THREE.Box3().setFromObject(mesh);
      label.position.set(mesh.position.x, mesh.position.y, box.max.z + 0.12);
      view.root.add(label);
    }
    this.scene.add(view.root);
    this.current = view;
    if (serverCamera) {
      applyServerCamera(this.camera, serverCamera);
      this.controls.target.set(...serverCamera.target);
      this.controls.update();
    }
  }

  private pick(ev: MouseEvent): void {
    if (!this.current || !this.onPick) return;
    const rect = this.renderer.domElement.getBoundingClientRect();
    const ndc = new THREE.Vector2(
      ((ev.clientX - rect.left) / rect.width) * 2 - 1,
      -((ev.clientY - rect.top) / rect.height) * 2 + 1
    );
    this.raycaster.setFromCamera(ndc, this.camera);
    const hit = this.raycaster.intersectObjects(this.current.pickables, false)[0];
    if (hit) {
      const data = hit.object.userData as InstanceUserData;
      this.onPick(data.id, data.category);
    }
  }

  private resize(): void {
    const w = this.container.clientWidth || window.innerWidth;
    const h = this.container.clientHeight || window.innerHeight;
    this.renderer.setSize(w, h);
    this.camera.aspect = w / h;
    this.camera.updateProjectionMatrix();
  }
}
