from cli.commands import cmd_bound, cmd_kernel, cmd_train, cmd_verify, parse_overrides
