"""Run the report twice with the same seed and compare every artifact byte for byte"""
import hashlib
import sys
import tempfile
from pathlib import Path

project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.core.config import load_config
from src.core.orchestrator import report


def digest_tree(root: Path) -> dict:
    return {
        str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(root.rglob("*")) if p.is_file()
    }


def main(config_path=None) -> int:
    digests = []
    with tempfile.TemporaryDirectory() as tmp:
        for run in ("a", "b"):
            config = load_config(config_path)
            config.output.dir = str(Path(tmp) / run)
            report(config)
            digests.append(digest_tree(Path(tmp) / run))

    print(f"\n🔍 Compared {len(digests[0])} artifacts")
    print("=" * 60)
    mismatched = sorted(name for name in set(digests[0]) | set(digests[1])
                        if digests[0].get(name) != digests[1].get(name))
    for name in mismatched:
        print(f"❌ {name}")
    if mismatched:
        print(f"\n❌ {len(mismatched)} artifacts differ between runs")
        return 1
    print("✅ All artifacts are byte-identical")
    return 0


if __name__ == "__main__":
    sys.exit(main(Path(sys.argv[1]) if len(sys.argv) > 1 else None))
