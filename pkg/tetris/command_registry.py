from typing import Any, Callable, Dict, List, Optional


class CommandRegistry:
    """
    Simple registry of CLI sub-commands (name, description, output kind)
    used to build the argument parser and dispatch runs.
    """

    def __init__(self):
        self._commands: Dict[str, Dict[str, Any]] = {}

    def register(self, name: str, description: str, output: str = "csv", columns: Optional[List[str]] = None):
        """Decorator to register a runner method as a sub-command."""

        def _decorator(fn: Callable):
            self._commands[name] = {
                "name": name,
                "description": description,
                "output": output,
                "columns": columns or [],
                "fn": fn,
            }
            return fn

        return _decorator

    def get_commands(self) -> List[Dict[str, Any]]:
        """Return command metadata (no callables), in registration order."""
        return [
            {key: entry[key] for key in ("name", "description", "output", "columns")}
            for entry in self._commands.values()
        ]

    def __contains__(self, name: str) -> bool:
        return name in self._commands

    def execute(self, name: str, runner: Any, *args, **kwargs) -> Any:
        """Run a registered command bound to ``runner``."""
        if name not in self._commands:
            raise KeyError(f"Command not found: {name}")
        return self._commands[name]["fn"](runner, *args, **kwargs)


# module-level singleton registry
registry = CommandRegistry()
