from relcont.cli import main

raise SystemExit(main())
